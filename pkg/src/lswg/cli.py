"""Command-line driver: convergence runs, mesh export, table merging.

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .assembly import ConfigurationError
from .mesh import MeshError, generate_grid, write_mesh
from .postproc import emit_report, parse_csv, format_mantissa, _fmt_rate, run_convergence
from .problems import get_problem
from .solver import SolverError, SolverOptions
from .space import SpaceConfig

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4


def _parse_levels(spec: str) -> list[int]:
    if ":" in spec:
        a, b = spec.split(":", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise ValueError("level range must be ascending")
        return list(range(lo, hi + 1))
    return [int(x) for x in spec.split(",")]


def _load_config_file(path: str) -> dict:
    values = {}
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lswg",
                                     description="Least-squares weak Galerkin solver")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a convergence study")
    run.add_argument("--problem", default="smooth",
                     help="smooth | discontinuous | polynomial[N]")
    run.add_argument("--degree", type=int, default=2, help="polynomial degree k (2..5)")
    run.add_argument("--hessian-degree", type=int, default=None,
                     help="weak Hessian degree r (default k)")
    run.add_argument("--grid", default="triangular", choices=["triangular", "polygonal"])
    run.add_argument("--levels", default="2:4", help="a:b or comma list")
    run.add_argument("--solver", default="auto", choices=["auto", "cg", "cholesky"])
    run.add_argument("--tol", type=float, default=1e-12)
    run.add_argument("--quad-order", type=int, default=None)
    run.add_argument("--out", default=None, help="output path (default stdout)")
    run.add_argument("--format", default="csv", choices=["csv", "table"])
    run.add_argument("--config", default=None, help="key = value config file")

    meshcmd = sub.add_parser("mesh", help="generate and write a mesh file")
    meshcmd.add_argument("--family", required=True, choices=["triangular", "polygonal"])
    meshcmd.add_argument("--level", type=int, required=True)
    meshcmd.add_argument("--domain", default="unit_square",
                         choices=["unit_square", "biunit_square"])
    meshcmd.add_argument("--out", required=True)

    table = sub.add_parser("table", help="merge run CSVs into a paper-style table")
    table.add_argument("csvs", nargs="+", help="CSV files from 'lswg run'")

    return parser


def cmd_run(args, argv) -> int:
    if args.config:
        try:
            overrides = _load_config_file(args.config)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        # flags given on the command line win over the config file
        given = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv
                 if a.startswith("--")}
        for key, val in overrides.items():
            if key in given or not hasattr(args, key):
                continue
            current = getattr(args, key)
            cast = type(current) if current is not None else str
            if key in ("degree", "hessian_degree", "quad_order"):
                cast = int
            if key == "tol":
                cast = float
            setattr(args, key, cast(val))

    try:
        if not (2 <= args.degree <= 5):
            raise ValueError("degree k must lie in [2, 5]")
        levels = _parse_levels(args.levels)
        config = SpaceConfig(
            k=args.degree,
            r=args.degree if args.hessian_degree is None else args.hessian_degree,
            quad_order=-1 if args.quad_order is None else args.quad_order,
        )
        problem = get_problem(args.problem)
        options = SolverOptions(method=args.solver, rel_tolerance=args.tol)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    os.environ.setdefault("LSWG_WORKERS", str(os.cpu_count() or 1))
    try:
        report = run_convergence(problem, args.grid, levels, config, options)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    text = emit_report(report, "csv" if args.format == "csv" else "paper_table")
    if args.out:
        try:
            with open(args.out, "w") as f:
                f.write(text)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_mesh(args) -> int:
    try:
        mesh = generate_grid(args.family, args.level, args.domain)
    except (ValueError, MeshError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        write_mesh(mesh, args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_table(args) -> int:
    out = []
    for path in args.csvs:
        try:
            with open(path) as f:
                report = parse_csv(f.read())
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        except ValueError as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        out.append(f"# {report.config_echo()}")
        out.append(f"{'Grid':>5} {'l2_error':>11} {'rate':>5} {'h2w_error':>11} {'rate':>5}")
        for r in report.rows:
            out.append(f"{r.level:>5} {format_mantissa(r.l2_error):>11} "
                       f"{_fmt_rate(r.l2_rate):>5} {format_mantissa(r.h2w_error):>11} "
                       f"{_fmt_rate(r.h2w_rate):>5}")
        out.append("")
    sys.stdout.write("\n".join(out))
    return EXIT_OK


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args, argv)
    if args.command == "mesh":
        return cmd_mesh(args)
    return cmd_table(args)


if __name__ == "__main__":
    sys.exit(main())
