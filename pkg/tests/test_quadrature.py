import numpy as np
import pytest
import sympy

from lswg.mesh import generate_grid
from lswg.quadrature import (GeometryError, ear_clip, quad_edge, quad_polygon,
                             quad_triangle)

from oracles import rasterize_integral

UNIT_TRIANGLE = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def test_triangle_weights_sum_to_area():
    rule = quad_triangle(UNIT_TRIANGLE, 2)
    assert rule.weights.sum() == pytest.approx(0.5, rel=1e-14)


def test_square_linear_moment():
    rule = quad_polygon(UNIT_SQUARE, 3)
    assert rule.integrate(lambda p: p[:, 0]) == pytest.approx(0.5, abs=1e-13)


def test_pentagon_vs_rasterization_oracle():
    mesh = generate_grid("polygonal", 1)
    pentagon = mesh.element_coords(0)
    rule = quad_polygon(pentagon, 6)
    f = lambda p: p[:, 0] ** 2 * p[:, 1] ** 2
    assert rule.integrate(f) == pytest.approx(rasterize_integral(f, pentagon),
                                              abs=1e-6)


@pytest.mark.parametrize("order", [2, 5, 9, 14])
def test_polygon_monomial_exactness(order):
    # reference: exact monomial integrals over the unit square
    rule = quad_polygon(UNIT_SQUARE, order)
    for a in range(order + 1):
        for b in range(order + 1 - a):
            exact = 1.0 / ((a + 1) * (b + 1))
            got = rule.integrate(lambda p: p[:, 0] ** a * p[:, 1] ** b)
            assert got == pytest.approx(exact, rel=1e-12)


def test_polygon_points_strictly_inside():
    mesh = generate_grid("polygonal", 1)
    from matplotlib.path import Path
    for t in range(mesh.n_elements):
        coords = mesh.element_coords(t)
        rule = quad_polygon(coords, 8)
        assert Path(coords).contains_points(rule.points).all()
        assert rule.weights.sum() == pytest.approx(mesh.elements[t].area, rel=1e-12)


def test_ear_clip_pentagon():
    mesh = generate_grid("polygonal", 1)
    tris = ear_clip(mesh.element_coords(0))
    assert len(tris) == 3


def test_degenerate_polygon_rejected():
    with pytest.raises(GeometryError):
        quad_triangle(np.array([[0, 0], [1, 0], [2, 0]], float), 2)


def test_edge_weights_sum_to_length():
    rule = quad_edge([0, 0], [1, 0], 4)
    assert rule.weights.sum() == pytest.approx(1.0, rel=1e-14)


def test_edge_cubic():
    rule = quad_edge([0, 0], [2, 0], 3)
    assert rule.integrate(lambda p: p[:, 0] ** 3) == pytest.approx(4.0, abs=1e-13)


def test_zero_length_edge_rejected():
    with pytest.raises(GeometryError):
        quad_edge([1, 1], [1, 1], 2)


@pytest.mark.parametrize("k", [2, 3])
def test_edge_rule_exact_for_polynomial_products(k):
    # product of two degree-(k+1) polynomials vs symbolic expansion
    rng = np.random.default_rng(7)
    a, b = np.array([0.2, -0.3]), np.array([1.1, 0.5])
    rule = quad_edge(a, b, 2 * k + 2)
    s = sympy.Symbol("s")
    x = a[0] + (b[0] - a[0]) * (s + 1) / 2
    y = a[1] + (b[1] - a[1]) * (s + 1) / 2
    length = float(np.hypot(*(b - a)))
    for _ in range(3):
        c1 = rng.standard_normal((k + 2, k + 2))
        c2 = rng.standard_normal((k + 2, k + 2))
        p1 = sum(c1[i, j] * x ** i * y ** j for i in range(k + 2) for j in range(k + 2 - i))
        p2 = sum(c2[i, j] * x ** i * y ** j for i in range(k + 2) for j in range(k + 2 - i))
        exact = float(sympy.integrate(sympy.expand(p1 * p2), (s, -1, 1))) * length / 2
        def f(pts, c1=c1, c2=c2):
            v1 = sum(c1[i, j] * pts[:, 0] ** i * pts[:, 1] ** j
                     for i in range(k + 2) for j in range(k + 2 - i))
            v2 = sum(c2[i, j] * pts[:, 0] ** i * pts[:, 1] ** j
                     for i in range(k + 2) for j in range(k + 2 - i))
            return v1 * v2
        assert rule.integrate(f) == pytest.approx(exact, rel=1e-12)
