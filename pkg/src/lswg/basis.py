"""Local polynomial bases: scaled monomials on elements, Legendre on edges.

Element bases use centered, diameter-scaled monomials
((x-xc)/hT)^a ((y-yc)/hT)^b so that local mass-matrix conditioning is
independent of the mesh size. Edge bases are Legendre polynomials in the
normalized arclength parameter s in [-1, 1], giving diagonal edge mass
matrices.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import legval


def poly_dim(m: int) -> int:
    """Dimension of total-degree-m polynomials in two variables."""
    return (m + 1) * (m + 2) // 2


def monomial_exponents(m: int) -> np.ndarray:
    """Exponent pairs (a, b), a+b <= m, ordered by total degree."""
    return np.array([(d - i, i) for d in range(m + 1) for i in range(d + 1)], dtype=int)


class ElementBasis:
    """Scaled monomial basis on one element.

    Parameters
    ----------
    center : (2,) array
        Scaling center, normally the element centroid.
    scale : float
        Scaling length, normally the element diameter h_T.
    degree : int
        Maximal total degree.
    """

    def __init__(self, center, scale: float, degree: int):
        self.center = np.asarray(center, float)
        self.scale = float(scale)
        self.degree = int(degree)
        self.exponents = monomial_exponents(degree)
        self.dim = len(self.exponents)

    def eval(self, points: np.ndarray, dx: int = 0, dy: int = 0,
             dtype=np.float64) -> np.ndarray:
        """Evaluate the (dx, dy)-derivative of every basis function.

        Returns an array of shape (npoints, dim). Passing
        ``dtype=np.longdouble`` evaluates in extended precision, which
        the local projection and weak-derivative solves use to beat the
        conditioning of the monomial mass matrices.
        """
        pts = np.atleast_2d(np.asarray(points)).astype(dtype)
        X = (pts[:, 0] - dtype(self.center[0])) / dtype(self.scale)
        Y = (pts[:, 1] - dtype(self.center[1])) / dtype(self.scale)
        out = np.empty((pts.shape[0], self.dim), dtype=dtype)
        for col, (a, b) in enumerate(self.exponents):
            ca, ea = _falling(a, dx)
            cb, eb = _falling(b, dy)
            if ca == 0 or cb == 0:
                out[:, col] = 0.0
            else:
                out[:, col] = ca * cb * X ** ea * Y ** eb
        return out / self.scale ** (dx + dy)

    def eval_coeffs(self, coeffs: np.ndarray, points: np.ndarray, dx: int = 0, dy: int = 0):
        """Evaluate the polynomial with the given coefficients."""
        return self.eval(points, dx, dy) @ np.asarray(coeffs, float)


def _falling(a: int, d: int) -> tuple[int, int]:
    """Coefficient and remaining exponent of d-fold differentiation of t^a."""
    if d > a:
        return 0, 0
    c = 1
    for i in range(d):
        c *= a - i
    return c, a - d


def spd_solve(M: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Cholesky solve of a small SPD system in the dtype of its inputs.

    LAPACK only handles float64, so extended-precision right-hand sides
    need this hand-rolled factorization. Raises LinAlgError on a
    nonpositive pivot. Intended for the local mass matrices (n <= ~30).
    """
    M = np.asarray(M)
    rhs = np.asarray(B)
    one_dim = rhs.ndim == 1
    if one_dim:
        rhs = rhs[:, None]
    n = M.shape[0]
    L = np.zeros_like(M)
    for j in range(n):
        d = M[j, j] - L[j, :j] @ L[j, :j]
        if d <= 0:
            raise np.linalg.LinAlgError("matrix is not positive definite")
        L[j, j] = np.sqrt(d)
        L[j + 1:, j] = (M[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    y = np.zeros_like(rhs)
    for i in range(n):
        y[i] = (rhs[i] - L[i, :i] @ y[:i]) / L[i, i]
    x = np.zeros_like(rhs)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - L[i + 1:, i] @ x[i + 1:]) / L[i, i]
    return x[:, 0] if one_dim else x


class EdgeBasis:
    """Legendre basis on one edge, parametrized by s in [-1, 1].

    The parametrization follows the edge's canonical endpoint order, so
    both incident elements see identical basis functions.
    """

    def __init__(self, a, b, degree: int):
        self.a = np.asarray(a, float)
        self.b = np.asarray(b, float)
        self.degree = int(degree)
        self.dim = degree + 1
        self.length = float(np.hypot(*(self.b - self.a)))
        self.mid = 0.5 * (self.a + self.b)
        self.tangent = (self.b - self.a) / self.length

    def param(self, points: np.ndarray, dtype=np.float64) -> np.ndarray:
        """Map physical points on the edge to s in [-1, 1]."""
        pts = np.atleast_2d(np.asarray(points)).astype(dtype)
        return 2.0 * ((pts - self.mid.astype(dtype)) @ self.tangent.astype(dtype)) / dtype(self.length)

    def eval(self, points: np.ndarray, dtype=np.float64) -> np.ndarray:
        """Evaluate all basis functions; shape (npoints, dim)."""
        s = self.param(points, dtype)
        out = np.empty((len(s), self.dim), dtype=dtype)
        for q in range(self.dim):
            c = np.zeros(q + 1)
            c[q] = 1.0
            out[:, q] = legval(s, c)
        return out

    def eval_coeffs(self, coeffs: np.ndarray, points: np.ndarray) -> np.ndarray:
        return self.eval(points) @ np.asarray(coeffs, float)
