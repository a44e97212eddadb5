"""Weak finite element space: configuration, DOF layout and projections.

A weak function carries three blocks of coefficients: an interior
polynomial of degree k per element, a trace polynomial of degree k per
edge, and a gradient-trace pair of degree k-1 polynomials per edge. The
gradient trace is stored in global Cartesian components, shared by both
incident elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .basis import EdgeBasis, ElementBasis, poly_dim, spd_solve
from .mesh import Mesh
from .quadrature import quad_edge, quad_polygon


@dataclass(frozen=True)
class SpaceConfig:
    """Polynomial degrees and quadrature order of the discretization.

    k is the interior/trace degree (>= 2); r is the degree of the weak
    Hessian range space (k-2 <= r <= k, default k); quad_order is the
    quadrature exactness degree (default 2k+2).
    """

    k: int
    r: int = -1
    quad_order: int = -1

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.r == -1:
            object.__setattr__(self, "r", self.k)
        if not (self.k - 2 <= self.r <= self.k):
            raise ValueError("r must satisfy k-2 <= r <= k")
        if self.quad_order == -1:
            object.__setattr__(self, "quad_order", 2 * self.k + 2)

    @property
    def interior_dim(self) -> int:
        return poly_dim(self.k)

    @property
    def trace_dim(self) -> int:
        return self.k + 1

    @property
    def grad_dim(self) -> int:
        """Per-component gradient-trace dimension (P_{k-1} on an edge)."""
        return self.k


class DofMap:
    """Global DOF layout: interior blocks, then v_b blocks, then v_g blocks.

    Boundary-edge v_b DOFs are the constrained set (homogeneous Dirichlet);
    v_g is unconstrained everywhere.
    """

    def __init__(self, mesh: Mesh, config: SpaceConfig):
        self.mesh = mesh
        self.config = config
        ni, nb, ng = config.interior_dim, config.trace_dim, 2 * config.grad_dim
        ne, nE = mesh.n_elements, mesh.n_edges
        self.interior_offset = np.arange(ne) * ni
        base_b = ne * ni
        self.trace_offset = base_b + np.arange(nE) * nb
        base_g = base_b + nE * nb
        self.grad_offset = base_g + np.arange(nE) * ng
        self.total = base_g + nE * ng

        constrained = []
        for e in mesh.boundary_edges:
            constrained.extend(range(self.trace_offset[e], self.trace_offset[e] + nb))
        self.constrained = np.array(sorted(constrained), dtype=int)
        self.free_mask = np.ones(self.total, dtype=bool)
        self.free_mask[self.constrained] = False
        self.n_free = int(self.free_mask.sum())
        # global index -> free index (-1 for constrained)
        self.free_index = np.full(self.total, -1, dtype=int)
        self.free_index[self.free_mask] = np.arange(self.n_free)
        self.free_dofs = np.nonzero(self.free_mask)[0]

    def interior_dofs(self, t: int) -> np.ndarray:
        ni = self.config.interior_dim
        return np.arange(self.interior_offset[t], self.interior_offset[t] + ni)

    def trace_dofs(self, e: int) -> np.ndarray:
        nb = self.config.trace_dim
        return np.arange(self.trace_offset[e], self.trace_offset[e] + nb)

    def grad_dofs(self, e: int) -> np.ndarray:
        """Gradient-trace DOFs of edge e: x-component block then y-component."""
        ng = 2 * self.config.grad_dim
        return np.arange(self.grad_offset[e], self.grad_offset[e] + ng)

    def element_dofs(self, t: int) -> np.ndarray:
        """Local-to-global map: interior, per-edge v_b, per-edge v_g."""
        el = self.mesh.elements[t]
        parts = [self.interior_dofs(t)]
        parts += [self.trace_dofs(e) for e in el.edges]
        parts += [self.grad_dofs(e) for e in el.edges]
        return np.concatenate(parts)

    def local_dim(self, t: int) -> int:
        m = len(self.mesh.elements[t].edges)
        return self.config.interior_dim + m * (self.config.trace_dim + 2 * self.config.grad_dim)


@dataclass
class WeakFunction:
    """Coefficient vector over a DofMap with per-entity accessors."""

    dofmap: DofMap
    coeffs: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.coeffs is None:
            self.coeffs = np.zeros(self.dofmap.total)
        self.coeffs = np.asarray(self.coeffs, float)
        if self.coeffs.shape != (self.dofmap.total,):
            raise ValueError("coefficient vector length does not match the DOF map")

    def interior(self, t: int) -> np.ndarray:
        return self.coeffs[self.dofmap.interior_dofs(t)]

    def trace(self, e: int) -> np.ndarray:
        return self.coeffs[self.dofmap.trace_dofs(e)]

    def grad_trace(self, e: int) -> np.ndarray:
        """Gradient-trace coefficients of edge e, shape (2, k)."""
        g = self.coeffs[self.dofmap.grad_dofs(e)]
        return g.reshape(2, self.dofmap.config.grad_dim)

    def local(self, t: int) -> np.ndarray:
        return self.coeffs[self.dofmap.element_dofs(t)]

    def eval_interior(self, t: int, points, dx: int = 0, dy: int = 0) -> np.ndarray:
        basis = element_basis(self.dofmap.mesh, t, self.dofmap.config.k)
        return basis.eval_coeffs(self.interior(t), points, dx, dy)


def element_basis(mesh: Mesh, t: int, degree: int) -> ElementBasis:
    el = mesh.elements[t]
    return ElementBasis(el.centroid, el.diameter, degree)


def edge_basis(mesh: Mesh, e: int, degree: int) -> EdgeBasis:
    a, b = mesh.edges[e].endpoints
    return EdgeBasis(mesh.vertices[a], mesh.vertices[b], degree)


def element_rule(mesh: Mesh, t: int, order: int, hi: bool = False):
    return quad_polygon(mesh.element_coords(t), order, hi)


def edge_rule(mesh: Mesh, e: int, order: int, hi: bool = False):
    a, b = mesh.edges[e].endpoints
    return quad_edge(mesh.vertices[a], mesh.vertices[b], order, hi)


def project_element(g, mesh: Mesh, t: int, m: int, quad_order: int,
                    dtype=np.float64) -> np.ndarray:
    """L2-project a scalar field onto P_m of element t.

    Returns scaled-monomial coefficients in the requested dtype. The
    moments and the SPD solve always run in extended precision: the
    monomial mass matrices are badly conditioned for m >= 3 and float64
    moment formation alone would cost several digits in the coefficients.
    """
    basis = element_basis(mesh, t, m)
    rule = element_rule(mesh, t, max(quad_order, 2 * m), hi=True)
    phi = basis.eval(rule.points, dtype=np.longdouble)
    w = rule.weights.astype(np.longdouble)
    vals = np.asarray(g(rule.points)).astype(np.longdouble)
    mass = phi.T @ (w[:, None] * phi)
    rhs = phi.T @ (w * vals)
    return spd_solve(mass, rhs).astype(dtype)


def project_edge(g, mesh: Mesh, e: int, m: int, quad_order: int,
                 dtype=np.float64) -> np.ndarray:
    """L2-project a scalar field onto P_m of edge e (Legendre coefficients)."""
    basis = edge_basis(mesh, e, m)
    rule = edge_rule(mesh, e, max(quad_order, 2 * m), hi=True)
    phi = basis.eval(rule.points, dtype=np.longdouble)
    w = rule.weights.astype(np.longdouble)
    vals = np.asarray(g(rule.points)).astype(np.longdouble)
    mass = phi.T @ (w[:, None] * phi)
    rhs = phi.T @ (w * vals)
    return spd_solve(mass, rhs).astype(dtype)


def interpolate_qh(u, grad_u, mesh: Mesh, config: SpaceConfig, dofmap: DofMap | None = None) -> WeakFunction:
    """Componentwise L2 projection of a smooth field into the weak space.

    ``u(points) -> values`` and ``grad_u(points) -> (npoints, 2)`` must be
    evaluable at quadrature points (piecewise-analytic data is fine: all
    quadrature points are interior to elements or edges).
    """
    if dofmap is None:
        dofmap = DofMap(mesh, config)
    v = WeakFunction(dofmap)
    for t in range(mesh.n_elements):
        v.coeffs[dofmap.interior_dofs(t)] = project_element(u, mesh, t, config.k, config.quad_order)
    for e in range(mesh.n_edges):
        v.coeffs[dofmap.trace_dofs(e)] = project_edge(u, mesh, e, config.k, config.quad_order)
        gx = project_edge(lambda p: np.asarray(grad_u(p))[:, 0], mesh, e, config.k - 1, config.quad_order)
        gy = project_edge(lambda p: np.asarray(grad_u(p))[:, 1], mesh, e, config.k - 1, config.quad_order)
        v.coeffs[dofmap.grad_dofs(e)] = np.concatenate([gx, gy])
    return v
