import math

import numpy as np
import pytest

from lswg.assembly import assemble, constant_coefficients, SourceField
from lswg.mesh import build_mesh, generate_grid
from lswg.postproc import (CSV_HEADER, ConvergenceReport, ConvergenceRow,
                           emit_report, error_function, format_mantissa,
                           h2w_error, l2_error, parse_csv, rates,
                           run_convergence, triple_norm)
from lswg.problems import problem_polynomial, problem_smooth
from lswg.solver import SolverOptions
from lswg.space import SpaceConfig, WeakFunction, DofMap, interpolate_qh


def test_l2_error_of_exact_interpolant_is_small():
    mesh = generate_grid("triangular", 2)
    cfg = SpaceConfig(k=3)
    u = lambda p: p[:, 0] ** 2 * p[:, 1]
    gu = lambda p: np.column_stack([2 * p[:, 0] * p[:, 1], p[:, 0] ** 2])
    v = interpolate_qh(u, gu, mesh, cfg)
    assert l2_error(u, v, mesh, cfg) < 1e-13


def test_l2_error_of_zero_function_is_the_norm():
    mesh = generate_grid("triangular", 2)
    cfg = SpaceConfig(k=2)
    v = WeakFunction(DofMap(mesh, cfg))
    u = lambda p: np.ones(len(p))
    assert l2_error(u, v, mesh, cfg) == pytest.approx(1.0, rel=1e-13)


def test_h2w_error_single_square_reference():
    # u = x^2 on one unit square element with u_h = 0: the exact Hessian
    # has constant Frobenius norm 2, so the error is 2
    verts = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float)
    mesh = build_mesh(verts, [[0, 1, 2, 3]], "unit_square")
    cfg = SpaceConfig(k=2)
    v = WeakFunction(DofMap(mesh, cfg))

    def hess(p):
        h = np.zeros((len(p), 2, 2))
        h[:, 0, 0] = 2.0
        return h

    assert h2w_error(hess, v, mesh, cfg) == pytest.approx(2.0, rel=1e-12)


def test_h2w_error_vanishes_for_reproduced_quadratic():
    mesh = generate_grid("polygonal", 1)
    cfg = SpaceConfig(k=2)
    u = lambda p: p[:, 0] ** 2 - p[:, 0] * p[:, 1]
    gu = lambda p: np.column_stack([2 * p[:, 0] - p[:, 1], -p[:, 0]])

    def hess(p):
        h = np.empty((len(p), 2, 2))
        h[:, 0, 0] = 2.0
        h[:, 0, 1] = h[:, 1, 0] = -1.0
        h[:, 1, 1] = 0.0
        return h

    v = interpolate_qh(u, gu, mesh, cfg)
    assert h2w_error(hess, v, mesh, cfg) < 1e-11


def test_rates_halving():
    assert rates([0.8, 0.2, 0.05], [1.0, 0.5, 0.25]) == pytest.approx([2.0, 2.0])


def test_rates_none_for_zero_error():
    out = rates([1e-3, 0.0], [1.0, 0.5])
    assert out == [None]
    with pytest.raises(ValueError):
        rates([1.0], [1.0])


def test_rate_rounding_in_table():
    # the published-style table prints rates to one decimal
    r = rates([0.768e-01, 0.181e-01], [1.0, 0.5])[0]
    assert f"{r:.1f}" == "2.1"


def test_format_mantissa():
    assert format_mantissa(0.00092712) == "0.927E-03"
    assert format_mantissa(0.0) == "0.000E+00"
    assert format_mantissa(-12.5) == "-0.125E+02"
    assert format_mantissa(0.9999999) == "0.100E+01"  # rollover


def test_triple_norm_properties():
    mesh = generate_grid("triangular", 2)
    cfg = SpaceConfig(k=2)
    prob = problem_smooth()
    unc = assemble(mesh, cfg, prob.coeff, prob.source, eliminate_bc=False)
    zero = WeakFunction(unc.dofmap)
    assert triple_norm(zero, unc) == 0.0
    v = interpolate_qh(prob.exact.u, prob.exact.grad, mesh, cfg, unc.dofmap)
    assert triple_norm(v, unc) > 0.0
    constrained = assemble(mesh, cfg, prob.coeff, prob.source)
    with pytest.raises(ValueError):
        triple_norm(zero, constrained)


def _tiny_report():
    prob = problem_polynomial(4)
    return run_convergence(prob, "triangular", [1, 2], SpaceConfig(k=2),
                           SolverOptions(method="cholesky"))


def test_run_convergence_rows():
    rep = _tiny_report()
    assert [r.level for r in rep.rows] == [1, 2]
    assert rep.rows[0].l2_rate is None
    assert rep.rows[1].l2_rate is not None
    assert rep.rows[1].h == rep.rows[0].h / 2
    assert rep.rows[1].ndof > rep.rows[0].ndof


def test_csv_round_trip_is_bit_exact():
    rep = _tiny_report()
    text = emit_report(rep, "csv")
    assert text.splitlines()[1] == CSV_HEADER
    back = parse_csv(text)
    assert (back.problem, back.k, back.r) == (rep.problem, rep.k, rep.r)
    for a, b in zip(rep.rows, back.rows):
        assert a.h == b.h
        assert a.l2_error == b.l2_error
        assert a.h2w_error == b.h2w_error
        assert a.l2_rate == b.l2_rate and a.h2w_rate == b.h2w_rate


def test_paper_table_rendering():
    rep = ConvergenceReport("smooth", "triangular", 3, 3, 8, "cholesky")
    rep.rows.append(ConvergenceRow(2, 0.5, 100, 0.768e-1, None, 0.2, None, 0, 0.1))
    rep.rows.append(ConvergenceRow(3, 0.25, 400, 0.181e-1, 2.0853, 0.05, 2.0, 0, 0.4))
    text = emit_report(rep, "paper_table")
    lines = text.splitlines()
    assert "0.768E-01" in lines[2] and "---" in lines[2]
    assert "0.181E-01" in lines[3] and " 2.1 " in lines[3] + " "


def test_parse_csv_rejects_wrong_schema():
    with pytest.raises(ValueError):
        parse_csv("level,h\n1,0.5\n")


def test_error_function_vanishes_on_constrained_dofs():
    mesh = generate_grid("triangular", 2)
    cfg = SpaceConfig(k=2)
    prob = problem_smooth()
    sys_ = assemble(mesh, cfg, prob.coeff, prob.source)
    u_h = WeakFunction(sys_.dofmap)
    u_h.coeffs[sys_.dofmap.free_dofs] = 0.1
    e = error_function(prob, u_h, mesh, cfg)
    assert np.abs(e.coeffs[sys_.dofmap.constrained]).max() == 0.0
