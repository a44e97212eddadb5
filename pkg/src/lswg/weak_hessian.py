"""Per-element discrete weak second-derivative operators.

For each index pair (i, j) the operator maps local weak-function
coefficients (interior block, per-edge trace blocks, per-edge
gradient-trace blocks) to the coefficients of a degree-r polynomial on
the element, via the defining moment identity

    (D2w_ij v, phi)_T = (v0, d2_ji phi)_T - <v_b n_i, d_j phi>_dT
                        + <v_gi, phi n_j>_dT      for all phi in P_r(T).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import ElementBasis, spd_solve
from .mesh import Mesh
from .space import SpaceConfig, edge_basis, edge_rule, element_basis, element_rule


@dataclass
class WeakHessianOperator:
    """Dense maps H[i][j] from local weak DOFs to P_r(T) coefficients.

    ``H`` holds float64 copies for assembly; ``H_hi`` keeps the
    extended-precision originals. The map entries are large and cancel
    heavily when applied to trace-consistent weak functions, so apply()
    runs the product in extended precision.
    """

    element: int
    range_basis: ElementBasis
    H: list[list[np.ndarray]]
    H_hi: list[list[np.ndarray]]

    def apply(self, local_dofs: np.ndarray, i: int, j: int) -> np.ndarray:
        """P_r(T) coefficients of the (i, j) weak second derivative."""
        local_dofs = np.asarray(local_dofs)
        mat = self.H_hi[i][j]
        if local_dofs.shape != (mat.shape[1],):
            raise ValueError(
                f"expected {mat.shape[1]} local DOFs, got {local_dofs.shape}"
            )
        return (mat @ local_dofs.astype(np.longdouble)).astype(float)

    def eval_at(self, local_dofs: np.ndarray, points: np.ndarray) -> np.ndarray:
        """All four entries at each point; shape (npoints, 2, 2)."""
        phi = self.range_basis.eval(points)
        out = np.empty((phi.shape[0], 2, 2))
        for i in range(2):
            for j in range(2):
                out[:, i, j] = phi @ self.apply(local_dofs, i, j)
        return out


def build_local_operator(
    mesh: Mesh, t: int, config: SpaceConfig, quad_order: int | None = None
) -> WeakHessianOperator:
    """Construct the four weak second-derivative maps of element ``t``.

    One Cholesky factorization of the P_r(T) mass matrix is reused for
    all four index pairs.
    """
    if quad_order is None:
        quad_order = config.quad_order
    el = mesh.elements[t]
    r = config.r
    k = config.k
    rbasis = element_basis(mesh, t, r)
    ibasis = element_basis(mesh, t, k)
    ni, nb, ngc = config.interior_dim, config.trace_dim, config.grad_dim
    nloc = ni + len(el.edges) * (nb + 2 * ngc)

    # the moments and the mass solve run in extended precision: float64
    # formation alone loses several coefficient digits through the
    # conditioning of the monomial mass matrix (see project_element)
    ld = np.longdouble
    rule = element_rule(mesh, t, quad_order, hi=True)
    weights = rule.weights.astype(ld)
    phi_r = rbasis.eval(rule.points, dtype=ld)
    mass = phi_r.T @ (weights[:, None] * phi_r)

    B = [[np.zeros((rbasis.dim, nloc), dtype=ld) for _ in range(2)] for _ in range(2)]

    # interior term: (phi0_m, d2_ji phi_p)_T
    d2 = {
        (0, 0): rbasis.eval(rule.points, dx=2, dtype=ld),
        (0, 1): rbasis.eval(rule.points, dx=1, dy=1, dtype=ld),
        (1, 1): rbasis.eval(rule.points, dy=2, dtype=ld),
    }
    d2[(1, 0)] = d2[(0, 1)]
    phi_k = ibasis.eval(rule.points, dtype=ld)
    for i in range(2):
        for j in range(2):
            B[i][j][:, :ni] = d2[(j, i)].T @ (weights[:, None] * phi_k)

    # boundary terms, per edge
    for loc, e in enumerate(el.edges):
        # recompute the outward unit normal in extended precision (the
        # stored float64 normal would contaminate the boundary moments)
        va, vb = mesh.edges[e].endpoints
        d = mesh.vertices[vb].astype(ld) - mesh.vertices[va].astype(ld)
        normal = np.array([d[1], -d[0]]) / np.sqrt(d @ d)
        if normal.astype(float) @ mesh.edges[e].unit_normal_of(t) < 0:
            normal = -normal
        erule = edge_rule(mesh, e, quad_order, hi=True)
        ebasis_b = edge_basis(mesh, e, k)
        ebasis_g = edge_basis(mesh, e, k - 1)
        Lb = ebasis_b.eval(erule.points, dtype=ld)
        Lg = ebasis_g.eval(erule.points, dtype=ld)
        phi = rbasis.eval(erule.points, dtype=ld)
        dphi = [rbasis.eval(erule.points, dx=1, dtype=ld),
                rbasis.eval(erule.points, dy=1, dtype=ld)]
        w = erule.weights.astype(ld)
        col_b = ni + loc * nb
        col_g = ni + len(el.edges) * nb + loc * 2 * ngc
        for i in range(2):
            for j in range(2):
                # -<v_b n_i, d_j phi>
                B[i][j][:, col_b:col_b + nb] -= normal[i] * dphi[j].T @ (w[:, None] * Lb)
                # +<v_gi, phi n_j>; the i-th Cartesian component block only
                cg = col_g + i * ngc
                B[i][j][:, cg:cg + ngc] += normal[j] * phi.T @ (w[:, None] * Lg)

    H_hi = [[spd_solve(mass, B[i][j]) for j in range(2)] for i in range(2)]
    H = [[H_hi[i][j].astype(float) for j in range(2)] for i in range(2)]
    return WeakHessianOperator(t, rbasis, H, H_hi)


class OperatorCache:
    """Memoized per-element weak Hessian operators for one (mesh, config)."""

    def __init__(self, mesh: Mesh, config: SpaceConfig, quad_order: int | None = None):
        self.mesh = mesh
        self.config = config
        self.quad_order = config.quad_order if quad_order is None else quad_order
        self._ops: dict[int, WeakHessianOperator] = {}

    def __getitem__(self, t: int) -> WeakHessianOperator:
        op = self._ops.get(t)
        if op is None:
            op = build_local_operator(self.mesh, t, self.config, self.quad_order)
            self._ops[t] = op
        return op
