"""Quadrature on segments, triangles and simple polygons.

Polygon rules are built by ear-clipping triangulation followed by a
Duffy-mapped tensor Gauss rule on each triangle, exact to the requested
total degree. Edge rules are plain Gauss-Legendre.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class GeometryError(Exception):
    """Raised for degenerate geometric input."""


@dataclass(frozen=True)
class QuadratureRule:
    """Points (physical coordinates) and weights of a quadrature rule."""

    points: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        return float(self.weights @ f(self.points))


@lru_cache(maxsize=None)
def _gauss_legendre(m: int, hi: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1].

    With ``hi`` the float64 nodes are polished by Newton iterations in
    extended precision; projection and weak-derivative moments need this
    because node rounding otherwise limits them to float64 exactness.
    """
    g, w = np.polynomial.legendre.leggauss(m)
    if not hi:
        return g, w
    x = g.astype(np.longdouble)
    for _ in range(3):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for n in range(2, m + 1):
            p0, p1 = p1, ((2 * n - 1) * x * p1 - (n - 1) * p0) / n
        dp = m * (x * p1 - p0) / (x * x - 1.0)
        x -= p1 / dp
    p0 = np.ones_like(x)
    p1 = x.copy()
    for n in range(2, m + 1):
        p0, p1 = p1, ((2 * n - 1) * x * p1 - (n - 1) * p0) / n
    dp = m * (x * p1 - p0) / (x * x - 1.0)
    return x, 2.0 / ((1.0 - x * x) * dp * dp)


@lru_cache(maxsize=None)
def _reference_triangle_rule(order: int, hi: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Rule on the reference triangle (0,0),(1,0),(0,1), exact to ``order``.

    Duffy map x = u, y = v(1-u); the Jacobian (1-u) raises the u-degree
    of a degree-``order`` integrand by one.
    """
    m = (order + 3) // 2
    g, w = _gauss_legendre(m, hi)
    u = 0.5 * (g + 1.0)
    wu = 0.5 * w
    U, V = np.meshgrid(u, u, indexing="ij")
    WU, WV = np.meshgrid(wu, wu, indexing="ij")
    x = U.ravel()
    y = (V * (1.0 - U)).ravel()
    wt = (WU * WV * (1.0 - U)).ravel()
    return np.column_stack([x, y]), wt


def quad_triangle(coords: np.ndarray, order: int, hi: bool = False) -> QuadratureRule:
    """Gauss rule on the triangle with rows of ``coords`` as vertices."""
    coords = np.asarray(coords, float)
    if hi:
        coords = coords.astype(np.longdouble)
    ref_pts, ref_wts = _reference_triangle_rule(order, hi)
    a, b, c = coords
    jac = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
    if abs(jac) < 1e-30:
        raise GeometryError("degenerate triangle")
    pts = a + ref_pts[:, :1] * (b - a) + ref_pts[:, 1:] * (c - a)
    return QuadratureRule(pts, ref_wts * abs(jac))


def ear_clip(coords: np.ndarray) -> list[tuple[int, int, int]]:
    """Triangulate a simple CCW polygon by ear clipping.

    Returns index triples into ``coords``. Handles reflex vertices (the
    zigzag pentagons have exactly one).
    """
    coords = np.asarray(coords, float)
    n = len(coords)
    if n < 3:
        raise GeometryError("polygon needs at least 3 vertices")
    idx = list(range(n))
    tris: list[tuple[int, int, int]] = []

    def cross(o, a, b):
        oa = coords[a] - coords[o]
        ob = coords[b] - coords[o]
        return oa[0] * ob[1] - oa[1] * ob[0]

    def point_in_tri(p, a, b, c):
        def s(u, v):
            return (coords[v][0] - coords[u][0]) * (p[1] - coords[u][1]) - (
                coords[v][1] - coords[u][1]
            ) * (p[0] - coords[u][0])

        return s(a, b) > 1e-14 and s(b, c) > 1e-14 and s(c, a) > 1e-14

    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 10 * n * n:
            raise GeometryError("ear clipping failed; polygon may be non-simple")
        m = len(idx)
        for k in range(m):
            a, b, c = idx[(k - 1) % m], idx[k], idx[(k + 1) % m]
            if cross(b, c, a) <= 1e-16 * _scale2(coords):
                continue  # reflex or collinear at b
            if any(point_in_tri(coords[j], a, b, c) for j in idx if j not in (a, b, c)):
                continue
            tris.append((a, b, c))
            idx.pop(k)
            break
        else:
            raise GeometryError("no ear found; polygon may be non-simple")
    tris.append(tuple(idx))
    return tris


def _scale2(coords: np.ndarray) -> float:
    span = coords.max(0) - coords.min(0)
    return float(span @ span)


def quad_polygon(coords: np.ndarray, order: int, hi: bool = False) -> QuadratureRule:
    """Rule exact to total degree ``order`` on a simple CCW polygon.

    All points are strictly interior (Duffy-Gauss points are interior to
    each triangle of the ear-clipping triangulation).
    """
    coords = np.asarray(coords, float)
    if len(coords) == 3:
        return quad_triangle(coords, order, hi)
    pts, wts = [], []
    for tri in ear_clip(coords):
        rule = quad_triangle(coords[list(tri)], order, hi)
        pts.append(rule.points)
        wts.append(rule.weights)
    return QuadratureRule(np.vstack(pts), np.concatenate(wts))


def quad_edge(a: np.ndarray, b: np.ndarray, order: int, hi: bool = False) -> QuadratureRule:
    """Gauss-Legendre rule on the segment from ``a`` to ``b``."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if hi:
        a = a.astype(np.longdouble)
        b = b.astype(np.longdouble)
    d = b - a
    length = np.sqrt(d @ d)
    if length < 1e-30:
        raise GeometryError("zero-length edge")
    m = max(1, (order + 2) // 2)
    g, w = _gauss_legendre(m, hi)
    mid = 0.5 * (a + b)
    pts = mid + 0.5 * np.outer(g, d)
    return QuadratureRule(pts, 0.5 * length * w)
