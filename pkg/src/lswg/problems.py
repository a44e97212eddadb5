"""Benchmark problems: coefficients, exact solution, derivatives, source.

The source term is always derived analytically from the exact solution
and the coefficient tensor; no numerical differentiation happens in
production paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import CoefficientField, SourceField, constant_coefficients


@dataclass(frozen=True)
class ExactSolution:
    """Evaluators for u, grad u and the Hessian of u.

    ``hessian(points) -> (npoints, 2, 2)``. Piecewise-analytic solutions
    are allowed when the jump lines are mesh lines.
    """

    u: callable
    grad: callable
    hessian: callable


@dataclass(frozen=True)
class Problem:
    name: str
    domain: str
    coeff: CoefficientField
    exact: ExactSolution
    source: SourceField


def _source_from(coeff: CoefficientField, exact: ExactSolution) -> SourceField:
    def f(points):
        a = coeff(points)
        h = exact.hessian(points)
        return np.einsum("qij,qij->q", a, h)

    return SourceField(f)


def problem_smooth() -> Problem:
    """Constant coefficients a = [[2,1],[1,2]] on the unit square.

    Exact solution u = (x - x^3)(y^2 - y^3), vanishing on the boundary.
    """

    def u(p):
        p = np.atleast_2d(p)
        x, y = p[:, 0], p[:, 1]
        return (x - x ** 3) * (y ** 2 - y ** 3)

    def grad(p):
        p = np.atleast_2d(p)
        x, y = p[:, 0], p[:, 1]
        return np.column_stack([(1 - 3 * x ** 2) * (y ** 2 - y ** 3),
                                (x - x ** 3) * (2 * y - 3 * y ** 2)])

    def hessian(p):
        p = np.atleast_2d(p)
        x, y = p[:, 0], p[:, 1]
        h = np.empty((len(x), 2, 2))
        h[:, 0, 0] = -6 * x * (y ** 2 - y ** 3)
        h[:, 0, 1] = h[:, 1, 0] = (1 - 3 * x ** 2) * (2 * y - 3 * y ** 2)
        h[:, 1, 1] = (x - x ** 3) * (2 - 6 * y)
        return h

    coeff = constant_coefficients([[2.0, 1.0], [1.0, 2.0]])
    exact = ExactSolution(u, grad, hessian)
    return Problem("smooth", "unit_square", coeff, exact, _source_from(coeff, exact))


def problem_discontinuous() -> Problem:
    """Sign-switching off-diagonal coefficients on the bi-unit square.

    a = (16/9) [[2, s], [s, 2]] with s = sign(xy); the exact solution
    u = xy(1 - e^{1-|x|})(1 - e^{1-|y|}) is C^1 across the axes. The
    coefficient evaluator rejects points exactly on an axis; quadrature
    never requests them on axis-aligned meshes.
    """

    def factor(t):
        # p(t) = t (1 - e^{1-|t|}) and its first two derivatives
        g = 1.0 - np.exp(1.0 - np.abs(t))
        dg = np.sign(t) * np.exp(1.0 - np.abs(t))
        d2g = -np.exp(1.0 - np.abs(t))
        return t * g, g + t * dg, 2.0 * dg + t * d2g

    def u(p):
        p = np.atleast_2d(p)
        px, _, _ = factor(p[:, 0])
        py, _, _ = factor(p[:, 1])
        return px * py

    def grad(p):
        p = np.atleast_2d(p)
        px, dpx, _ = factor(p[:, 0])
        py, dpy, _ = factor(p[:, 1])
        return np.column_stack([dpx * py, px * dpy])

    def hessian(p):
        p = np.atleast_2d(p)
        px, dpx, d2px = factor(p[:, 0])
        py, dpy, d2py = factor(p[:, 1])
        h = np.empty((len(px), 2, 2))
        h[:, 0, 0] = d2px * py
        h[:, 0, 1] = h[:, 1, 0] = dpx * dpy
        h[:, 1, 1] = px * d2py
        return h

    def a(p):
        p = np.atleast_2d(p)
        xy = p[:, 0] * p[:, 1]
        if np.any(xy == 0.0):
            raise ValueError("coefficient tensor is undefined on the axes x=0, y=0")
        s = np.sign(xy)
        out = np.empty((len(s), 2, 2))
        out[:, 0, 0] = out[:, 1, 1] = 32.0 / 9.0
        out[:, 0, 1] = out[:, 1, 0] = (16.0 / 9.0) * s
        return out

    coeff = CoefficientField(a, alpha=16.0 / 9.0, beta=16.0 / 3.0,
                             discontinuities=[("x", 0.0), ("y", 0.0)])
    exact = ExactSolution(u, grad, hessian)
    return Problem("discontinuous", "biunit_square", coeff, exact,
                   _source_from(coeff, exact))


def problem_polynomial(degree: int = 4, coeff_matrix=None) -> Problem:
    """Manufactured polynomial with zero boundary trace on the unit square.

    u = x(1-x) y(1-y) (x + y)^{degree-4}; degree >= 4. Used for
    exactness tests: for k >= degree the scheme reproduces the
    interpolant to solver precision.
    """
    if degree < 4:
        raise ValueError("degree must be >= 4 (bubble factor has degree 4)")
    import sympy

    x, y = sympy.symbols("x y")
    expr = x * (1 - x) * y * (1 - y) * (x + y) ** (degree - 4)
    ux, uy = sympy.diff(expr, x), sympy.diff(expr, y)
    hxx, hxy, hyy = sympy.diff(ux, x), sympy.diff(ux, y), sympy.diff(uy, y)
    fu, fux, fuy = (sympy.lambdify((x, y), e, "numpy") for e in (expr, ux, uy))
    fxx, fxy, fyy = (sympy.lambdify((x, y), e, "numpy") for e in (hxx, hxy, hyy))

    def u(p):
        p = np.atleast_2d(p)
        return np.broadcast_to(fu(p[:, 0], p[:, 1]), (len(p),)).astype(float)

    def grad(p):
        p = np.atleast_2d(p)
        gx = np.broadcast_to(fux(p[:, 0], p[:, 1]), (len(p),))
        gy = np.broadcast_to(fuy(p[:, 0], p[:, 1]), (len(p),))
        return np.column_stack([gx, gy]).astype(float)

    def hessian(p):
        p = np.atleast_2d(p)
        h = np.empty((len(p), 2, 2))
        h[:, 0, 0] = np.broadcast_to(fxx(p[:, 0], p[:, 1]), (len(p),))
        h[:, 0, 1] = h[:, 1, 0] = np.broadcast_to(fxy(p[:, 0], p[:, 1]), (len(p),))
        h[:, 1, 1] = np.broadcast_to(fyy(p[:, 0], p[:, 1]), (len(p),))
        return h

    if coeff_matrix is None:
        coeff_matrix = [[2.0, 1.0], [1.0, 2.0]]
    coeff = constant_coefficients(coeff_matrix)
    exact = ExactSolution(u, grad, hessian)
    return Problem(f"polynomial{degree}", "unit_square", coeff, exact,
                   _source_from(coeff, exact))


def get_problem(name: str) -> Problem:
    """Look up a problem by CLI name."""
    if name == "smooth":
        return problem_smooth()
    if name == "discontinuous":
        return problem_discontinuous()
    if name.startswith("polynomial"):
        degree = int(name[len("polynomial"):] or 4)
        return problem_polynomial(degree)
    raise KeyError(f"unknown problem {name!r}")
