"""Error norms, convergence rates, and table/CSV emission.

The discrete H2 error column integrates, element by element, the
Frobenius distance between the exact Hessian and the weak Hessian of the
numerical solution. Rates are reported per consecutive grid pair.
"""

from __future__ import annotations

import io
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .assembly import CoefficientField, SparseSystem, assemble
from .mesh import Mesh, generate_grid
from .problems import Problem
from .solver import SolverOptions, solve
from .space import DofMap, SpaceConfig, WeakFunction, element_rule, interpolate_qh
from .weak_hessian import OperatorCache

CSV_HEADER = "level,h,ndof,l2_error,l2_rate,h2w_error,h2w_rate,iters,seconds"


def l2_error(u_exact, u_h: WeakFunction, mesh: Mesh, config: SpaceConfig) -> float:
    """L2 distance between the exact solution and the interior component."""
    total = 0.0
    order = config.quad_order + 2
    for t in range(mesh.n_elements):
        rule = element_rule(mesh, t, order)
        diff = np.asarray(u_exact(rule.points), float) - u_h.eval_interior(t, rule.points)
        total += rule.weights @ diff ** 2
    return math.sqrt(total)


def h2w_error(
    hessian_exact, u_h: WeakFunction, mesh: Mesh, config: SpaceConfig,
    ops: OperatorCache | None = None,
) -> float:
    """Frobenius L2 distance between the exact and weak Hessians."""
    if ops is None:
        ops = OperatorCache(mesh, config)
    total = 0.0
    order = config.quad_order + 2
    for t in range(mesh.n_elements):
        rule = element_rule(mesh, t, order)
        exact = np.asarray(hessian_exact(rule.points), float)
        approx = ops[t].eval_at(u_h.local(t), rule.points)
        total += rule.weights @ ((exact - approx) ** 2).sum(axis=(1, 2))
    return math.sqrt(total)


def triple_norm(v: WeakFunction, unconstrained: SparseSystem) -> float:
    """Energy norm (a(v,v) + s(v,v))^{1/2} via the unconstrained matrix."""
    if unconstrained.eliminated:
        raise ValueError("triple_norm needs an unconstrained assembly")
    x = v.coeffs
    return math.sqrt(max(0.0, float(x @ (unconstrained.A @ x))))


def rates(errors, hs) -> list:
    """Per-pair convergence rates; None where undefined (zero error)."""
    errors = list(errors)
    hs = list(hs)
    if len(errors) != len(hs) or len(errors) < 2:
        raise ValueError("need equal-length lists with at least two entries")
    out = []
    for (e0, e1), (h0, h1) in zip(zip(errors, errors[1:]), zip(hs, hs[1:])):
        if e0 <= 0 or e1 <= 0:
            out.append(None)
        else:
            out.append(math.log(e0 / e1) / math.log(h0 / h1))
    return out


@dataclass
class ConvergenceRow:
    level: int
    h: float
    ndof: int
    l2_error: float
    l2_rate: float | None
    h2w_error: float
    h2w_rate: float | None
    iters: int
    seconds: float


@dataclass
class ConvergenceReport:
    """Per-level errors and rates, plus the configuration that made them."""

    problem: str
    family: str
    k: int
    r: int
    quad_order: int
    solver: str
    rows: list = field(default_factory=list)

    def config_echo(self) -> str:
        return (f"problem={self.problem} grid={self.family} k={self.k} r={self.r} "
                f"quad_order={self.quad_order} solver={self.solver}")


def run_convergence(
    problem: Problem,
    family: str,
    levels,
    config: SpaceConfig,
    options: SolverOptions = SolverOptions(),
) -> ConvergenceReport:
    """Mesh, assemble, solve and measure errors for each level."""
    report = ConvergenceReport(problem.name, family, config.k, config.r,
                               config.quad_order, options.method)
    prev = None
    for level in levels:
        t0 = time.perf_counter()
        mesh = generate_grid(family, level, problem.domain)
        ops = OperatorCache(mesh, config)
        system = assemble(mesh, config, problem.coeff, problem.source, ops=ops)
        sol = solve(system.A, system.b, options)
        u_h = WeakFunction(system.dofmap)
        u_h.coeffs[system.dofmap.free_dofs] = sol.x
        el2 = l2_error(problem.exact.u, u_h, mesh, config)
        eh2 = h2w_error(problem.exact.hessian, u_h, mesh, config, ops)
        if prev is None:
            rl2 = rh2 = None
        else:
            rl2 = rates([prev[1], el2], [prev[0], mesh.h])[0]
            rh2 = rates([prev[2], eh2], [prev[0], mesh.h])[0]
        report.rows.append(ConvergenceRow(
            level, mesh.h, system.dofmap.n_free, el2, rl2, eh2, rh2,
            sol.iterations, time.perf_counter() - t0,
        ))
        prev = (mesh.h, el2, eh2)
    return report


def format_mantissa(value: float) -> str:
    """Fixed-point mantissa-exponent format 0.dddE+dd."""
    if value == 0.0:
        return "0.000E+00"
    e = math.floor(math.log10(abs(value))) + 1
    m = value / 10.0 ** e
    d = round(abs(m) * 1000)
    if d >= 1000:
        d = 100
        e += 1
    sign = "-" if value < 0 else ""
    return f"{sign}0.{d:03d}E{e:+03d}"


def _fmt_rate(r) -> str:
    return "---" if r is None else f"{r:.1f}"


def emit_report(report: ConvergenceReport, fmt: str = "csv") -> str:
    """Render a report as CSV (full precision) or a paper-style table."""
    out = io.StringIO()
    if fmt == "csv":
        out.write(f"# {report.config_echo()}\n")
        out.write(CSV_HEADER + "\n")
        for r in report.rows:
            rl2 = "" if r.l2_rate is None else repr(r.l2_rate)
            rh2 = "" if r.h2w_rate is None else repr(r.h2w_rate)
            out.write(f"{r.level},{r.h!r},{r.ndof},{r.l2_error!r},{rl2},"
                      f"{r.h2w_error!r},{rh2},{r.iters},{r.seconds!r}\n")
    elif fmt == "paper_table" or fmt == "table":
        out.write(f"# {report.config_echo()}\n")
        out.write(f"{'Grid':>5} {'l2_error':>11} {'rate':>5} {'h2w_error':>11} {'rate':>5}\n")
        for r in report.rows:
            out.write(f"{r.level:>5} {format_mantissa(r.l2_error):>11} "
                      f"{_fmt_rate(r.l2_rate):>5} {format_mantissa(r.h2w_error):>11} "
                      f"{_fmt_rate(r.h2w_rate):>5}\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return out.getvalue()


def parse_csv(text: str) -> ConvergenceReport:
    """Parse CSV emitted by emit_report back into a report (bit-exact)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    echo = {}
    if lines and lines[0].startswith("#"):
        for kv in lines.pop(0)[1:].split():
            key, _, val = kv.partition("=")
            echo[key] = val
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("CSV schema mismatch")
    report = ConvergenceReport(
        echo.get("problem", "?"), echo.get("grid", "?"),
        int(echo.get("k", 0)), int(echo.get("r", 0)),
        int(echo.get("quad_order", 0)), echo.get("solver", "?"),
    )
    for ln in lines[1:]:
        cells = ln.split(",")
        report.rows.append(ConvergenceRow(
            int(cells[0]), float(cells[1]), int(cells[2]), float(cells[3]),
            float(cells[4]) if cells[4] else None, float(cells[5]),
            float(cells[6]) if cells[6] else None, int(cells[7]), float(cells[8]),
        ))
    return report


def error_function(
    problem: Problem, u_h: WeakFunction, mesh: Mesh, config: SpaceConfig
) -> WeakFunction:
    """The weak function Q_h u - u_h (a member of the zero-trace subspace)."""
    qh = interpolate_qh(problem.exact.u, problem.exact.grad, mesh, config, u_h.dofmap)
    e = WeakFunction(u_h.dofmap, qh.coeffs - u_h.coeffs)
    e.coeffs[u_h.dofmap.constrained] = 0.0
    return e
