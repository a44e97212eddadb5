"""Global assembly of the least-squares system with edge stabilization.

The bilinear form is the elementwise L2 product of coefficient-weighted
weak Hessians plus an edge penalty (h^-3 on value jumps, h^-1 on
gradient jumps). Homogeneous Dirichlet data is imposed by deleting the
boundary-edge trace DOFs, which preserves exact symmetry.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh
from .space import DofMap, SpaceConfig, edge_basis, edge_rule, element_basis, element_rule
from .weak_hessian import OperatorCache, WeakHessianOperator


class ConfigurationError(Exception):
    """Raised when problem data and mesh are incompatible."""


@dataclass
class CoefficientField:
    """Symmetric uniformly elliptic coefficient tensor.

    ``evaluate(points) -> (npoints, 2, 2)``. ``discontinuities`` lists
    axis-aligned jump lines as (axis, value) pairs, e.g. ("x", 0.0);
    assembly refuses meshes whose element interiors cross them.
    """

    evaluate: callable
    alpha: float
    beta: float
    discontinuities: list = field(default_factory=list)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluate(points), float)


@dataclass
class SourceField:
    """Scalar right-hand side, evaluable at quadrature points."""

    evaluate: callable

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluate(points), float)


def constant_coefficients(matrix) -> CoefficientField:
    """Coefficient field for a constant SPD 2x2 matrix."""
    a = np.asarray(matrix, float)
    if a.shape != (2, 2) or abs(a[0, 1] - a[1, 0]) > 1e-14:
        raise ValueError("coefficient matrix must be symmetric 2x2")
    eig = np.linalg.eigvalsh(a)
    if eig[0] <= 0:
        raise ValueError("coefficient matrix must be positive definite")
    return CoefficientField(
        evaluate=lambda pts: np.broadcast_to(a, (len(np.atleast_2d(pts)), 2, 2)),
        alpha=float(eig[0]),
        beta=float(eig[1]),
    )


@dataclass
class SparseSystem:
    """Assembled SPD system over the free DOFs."""

    A: sp.csr_matrix
    b: np.ndarray
    dofmap: DofMap
    nnz: int
    assembly_seconds: float
    eliminated: bool


def _ls_rows(op: WeakHessianOperator, coeff_vals: np.ndarray, rule) -> np.ndarray:
    """Rows g_p(x_q) = sum_ij a_ij(x_q) (D2w_ij phi_p)(x_q); shape (nq, nloc)."""
    phi_r = op.range_basis.eval(rule.points)
    g = None
    for i in range(2):
        for j in range(2):
            term = coeff_vals[:, i, j, None] * (phi_r @ op.H[i][j])
            g = term if g is None else g + term
    return g


def local_ls_block(op: WeakHessianOperator, coeff: CoefficientField, rule) -> np.ndarray:
    """Least-squares block of one element; symmetric positive semidefinite."""
    g = _ls_rows(op, coeff(rule.points), rule)
    block = g.T @ (rule.weights[:, None] * g)
    return 0.5 * (block + block.T)


def local_load(op: WeakHessianOperator, coeff: CoefficientField, source: SourceField, rule) -> np.ndarray:
    """Load vector entries (f, sum_ij a_ij D2w_ij phi_p)_T."""
    g = _ls_rows(op, coeff(rule.points), rule)
    return g.T @ (rule.weights * source(rule.points))


def local_stabilizer(mesh: Mesh, t: int, config: SpaceConfig) -> np.ndarray:
    """Edge-penalty block: h^-3 value jumps plus h^-1 gradient jumps.

    Its kernel is exactly the local weak functions whose traces match the
    interior polynomial on every edge of the element.
    """
    el = mesh.elements[t]
    k = config.k
    ni, nb, ngc = config.interior_dim, config.trace_dim, config.grad_dim
    nloc = ni + len(el.edges) * (nb + 2 * ngc)
    ibasis = element_basis(mesh, t, k)
    hT = el.diameter
    S = np.zeros((nloc, nloc))
    for loc, e in enumerate(el.edges):
        erule = edge_rule(mesh, e, config.quad_order)
        w = erule.weights
        col_b = ni + loc * nb
        col_g = ni + len(el.edges) * nb + loc * 2 * ngc

        J0 = np.zeros((len(w), nloc))
        J0[:, :ni] = ibasis.eval(erule.points)
        J0[:, col_b:col_b + nb] = -edge_basis(mesh, e, k).eval(erule.points)
        S += hT ** -3 * (J0.T @ (w[:, None] * J0))

        Lg = edge_basis(mesh, e, k - 1).eval(erule.points)
        for c, (dx, dy) in enumerate(((1, 0), (0, 1))):
            Jc = np.zeros((len(w), nloc))
            Jc[:, :ni] = ibasis.eval(erule.points, dx=dx, dy=dy)
            cg = col_g + c * ngc
            Jc[:, cg:cg + ngc] = -Lg
            S += hT ** -1 * (Jc.T @ (w[:, None] * Jc))
    return 0.5 * (S + S.T)


def check_alignment(mesh: Mesh, coeff: CoefficientField) -> None:
    """Refuse coefficient jump lines that cross element interiors."""
    for axis, value in coeff.discontinuities:
        c = 0 if axis == "x" else 1
        for t in range(mesh.n_elements):
            pts = mesh.element_coords(t)[:, c]
            if pts.min() < value - 1e-12 and pts.max() > value + 1e-12:
                raise ConfigurationError(
                    f"coefficient jump line {axis}={value} crosses element {t}"
                )


def assemble(
    mesh: Mesh,
    config: SpaceConfig,
    coeff: CoefficientField,
    source: SourceField,
    ops: OperatorCache | None = None,
    eliminate_bc: bool = True,
) -> SparseSystem:
    """Assemble the global matrix and load vector.

    With ``eliminate_bc`` the constrained boundary trace DOFs are removed
    by row/column deletion; otherwise the full (singular) matrix over all
    DOFs is returned, which postprocessing uses for energy norms.
    """
    check_alignment(mesh, coeff)
    t0 = time.perf_counter()
    dofmap = DofMap(mesh, config)
    if ops is None:
        ops = OperatorCache(mesh, config)

    rows, cols, vals = [], [], []
    n = dofmap.n_free if eliminate_bc else dofmap.total
    b = np.zeros(n)
    for t in range(mesh.n_elements):
        op = ops[t]
        rule = element_rule(mesh, t, config.quad_order)
        block = local_ls_block(op, coeff, rule) + local_stabilizer(mesh, t, config)
        load = local_load(op, coeff, source, rule)
        gdofs = dofmap.element_dofs(t)
        if eliminate_bc:
            gdofs = dofmap.free_index[gdofs]
            keep = gdofs >= 0
            block = block[np.ix_(keep, keep)]
            load = load[keep]
            gdofs = gdofs[keep]
        r, c = np.meshgrid(gdofs, gdofs, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(block.ravel())
        np.add.at(b, gdofs, load)

    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    A.sum_duplicates()
    A = (A + A.T) * 0.5  # exact: averages identical summands
    A.sort_indices()
    return SparseSystem(A, b, dofmap, A.nnz, time.perf_counter() - t0, eliminate_bc)


def export_matrix(system: SparseSystem, sink) -> None:
    """Write 'n nnz' header plus 'row col value' triplets, sorted row-major."""
    own = isinstance(sink, (str, bytes))
    f = open(sink, "w") if own else sink
    try:
        A = system.A.tocoo()
        f.write(f"{A.shape[0]} {A.nnz}\n")
        order = np.lexsort((A.col, A.row))
        for i in order:
            f.write(f"{A.row[i]} {A.col[i]} {A.data[i]:.17g}\n")
    finally:
        if own:
            f.close()
