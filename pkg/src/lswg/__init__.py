"""Least-squares weak Galerkin solver for elliptic equations in
non-divergence form on triangular and non-convex polygonal meshes."""

from .assembly import (CoefficientField, ConfigurationError, SourceField,
                       SparseSystem, assemble, constant_coefficients,
                       export_matrix)
from .mesh import (Mesh, MeshError, generate_grid, read_mesh, validate,
                   write_mesh)
from .postproc import (ConvergenceReport, emit_report, error_function,
                       h2w_error, l2_error, rates, run_convergence,
                       triple_norm)
from .problems import (Problem, get_problem, problem_discontinuous,
                       problem_polynomial, problem_smooth)
from .quadrature import QuadratureRule, quad_edge, quad_polygon
from .solver import NotSPDError, SolverError, SolverOptions, SolveReport, solve
from .space import (DofMap, SpaceConfig, WeakFunction, interpolate_qh,
                    project_edge, project_element)
from .weak_hessian import OperatorCache, WeakHessianOperator, build_local_operator

__version__ = "0.1.0"
