"""Command-line driver: ``tpns mesh|run|study|check --config <file> [--out <dir>]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .fem import FeSystem
from .io import (
    RunConfig,
    parse_config,
    write_errors_csv,
    write_slopes_csv,
    write_step_csv,
    write_vtk,
)
from .mesh import UnsupportedGeometryError, generate_sector_mesh, mesh_stats, write_mesh
from .scheme import ConfigurationError, ProjectionScheme
from .sparse import SolverError
from .verification import SLOPE_WINDOWS, StudyAborted, convergence_study, property_suite

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_CHECK = 3

log = logging.getLogger("tpns")


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fe(cfg: RunConfig, h: float | None = None) -> FeSystem:
    mesh = generate_sector_mesh(cfg.r1, cfg.r2, cfg.theta1, cfg.theta2, cfg.target_h if h is None else h)
    return FeSystem(mesh)


def cmd_mesh(cfg: RunConfig) -> int:
    mesh = generate_sector_mesh(cfg.r1, cfg.r2, cfg.theta1, cfg.theta2, cfg.target_h)
    path = _out_dir(cfg) / "mesh.txt"
    write_mesh(mesh, path)
    stats = mesh_stats(mesh)
    print(f"wrote {path}: {stats['n_vertices']} vertices, {stats['n_triangles']} triangles, h={stats['h']:.6g}")
    return EXIT_OK


def cmd_run(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    fe = _fe(cfg)
    scheme = ProjectionScheme(fe, cfg.problem().data(), cfg.scheme_config(), cfg.solver)
    wanted = set(int(k) for k in cfg.snapshot_steps)

    def snapshot(k, state):
        if k in wanted:
            write_vtk(fe, state.ustar, state.pressure, out / f"snapshot_{k:05d}.vtk", f"step {k}")

    reports = scheme.run([snapshot])
    write_step_csv(reports, out / "steps.csv")
    print(f"wrote {out / 'steps.csv'} ({len(reports)} steps)")
    return EXIT_OK


def cmd_study(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    result = convergence_study(
        cfg.problem(), tau_list=cfg.tau_list, T=cfg.T, pressure_solver=cfg.solver, fe=_fe(cfg)
    )
    write_errors_csv(result, out / "errors.csv")
    write_slopes_csv(result, SLOPE_WINDOWS, out / "slopes.csv")
    ok = result.slopes_within()
    for col, slope in result.slopes.items():
        lo, hi = SLOPE_WINDOWS[col]
        print(f"{'PASS' if ok[col] else 'FAIL'} {col}: slope={slope:.3f} window=[{lo}, {hi}]")
    return EXIT_OK if all(ok.values()) else EXIT_CHECK


def cmd_check(cfg: RunConfig) -> int:
    report = property_suite(cfg.problem(), mesh_h=cfg.check_h)
    for c in report.checks:
        print(c.line())
    return EXIT_OK if report.passed else EXIT_CHECK


COMMANDS = {"mesh": cmd_mesh, "run": cmd_run, "study": cmd_study, "check": cmd_check}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="tpns", description=__doc__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON object with flat snake_case keys")
    parser.add_argument("--out", help="output directory (overrides out_dir)")
    parser.add_argument("-v", "--verbose", action="store_true")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        cfg = parse_config(args.config, out_dir=args.out)
    except (ConfigurationError, OSError, ValueError) as exc:
        print(f"tpns: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg)
    except (ConfigurationError, UnsupportedGeometryError) as exc:
        print(f"tpns: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, StudyAborted) as exc:
        print(f"tpns: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
