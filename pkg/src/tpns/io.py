"""Run configuration, CSV reports, and legacy VTK snapshots."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fem import FeSystem, Field
from .manufactured import SectorProblem
from .scheme import ConfigurationError, SchemeConfig, StepReport
from .verification import ERROR_COLUMNS, StudyResult, default_taus


@dataclass
class RunConfig:
    r1: float = 2.0
    r2: float = 3.0
    theta1: float = 0.0
    theta2: float = math.pi / 2
    p_in: float = 1.0
    p_out: float = -1.0
    target_h: float = 2.0**-5
    tau: float = 2.0**-4
    T: float = 1.0
    solver: str = "direct"
    out_dir: str = "out"
    tau_list: list = field(default_factory=default_taus)
    snapshot_steps: list = field(default_factory=list)
    check_h: float = 2.0**-4

    def __post_init__(self):
        if self.solver not in ("direct", "cg"):
            raise ConfigurationError(f"solver must be 'direct' or 'cg', got {self.solver!r}")
        if not self.target_h > 0 or not self.check_h > 0:
            raise ConfigurationError("mesh sizes must be positive")
        # validates tau < 1 and that tau divides T
        SchemeConfig.from_final_time(self.T, self.tau)
        for tau in self.tau_list:
            SchemeConfig.from_final_time(self.T, tau)
        self.problem()

    def problem(self) -> SectorProblem:
        try:
            return SectorProblem(self.r1, self.r2, self.theta1, self.theta2, self.p_in, self.p_out)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc

    def scheme_config(self) -> SchemeConfig:
        return SchemeConfig.from_final_time(self.T, self.tau)


def parse_config(source: str | Path | dict | None = None, **overrides) -> RunConfig:
    """Build a validated config from a JSON file, a dict, or nothing (all defaults)."""
    if source is None:
        raw = {}
    elif isinstance(source, dict):
        raw = dict(source)
    else:
        raw = json.loads(Path(source).read_text() or "{}")
    if not isinstance(raw, dict):
        raise ConfigurationError("config must be a JSON object")
    raw.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
    try:
        return RunConfig(**raw)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


STEP_COLUMNS = ("k", "t", "res_vel", "res_press", "norm_ustar", "norm_u", "norm_div_ustar")


def write_step_csv(reports: list[StepReport], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STEP_COLUMNS)
        for r in reports:
            w.writerow([_fmt(getattr(r, c)) for c in STEP_COLUMNS])


def write_errors_csv(result: StudyResult, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("tau",) + ERROR_COLUMNS)
        for row in result.rows:
            w.writerow([_fmt(row.tau)] + [_fmt(row.errors[c]) for c in ERROR_COLUMNS])
        if result.slopes:
            w.writerow(["slope"] + [_fmt(result.slopes[c]) for c in ERROR_COLUMNS])


def write_slopes_csv(result: StudyResult, windows: dict, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("column", "slope", "lo", "hi", "pass"))
        for c in ERROR_COLUMNS:
            s = result.slopes[c]
            lo, hi = windows[c]
            w.writerow([c, _fmt(s), _fmt(lo), _fmt(hi), int(lo <= s <= hi)])


def read_errors_csv(path: str | Path) -> tuple[list[dict], dict]:
    rows, slopes = [], {}
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            if rec["tau"] == "slope":
                slopes = {c: float(rec[c]) for c in ERROR_COLUMNS}
            else:
                rows.append({k: float(v) for k, v in rec.items()})
    return rows, slopes


def write_vtk(fe: FeSystem, velocity: Field, pressure: Field, path: str | Path, title: str = "tpns") -> None:
    """Legacy ASCII unstructured grid; velocity and pressure sampled at the mesh vertices."""
    mesh = fe.mesh
    nv, nt = mesh.n_vertices, mesh.n_triangles
    ux, uy = velocity.components()
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {nv} double",
    ]
    lines += [f"{_fmt(x)} {_fmt(y)} 0" for x, y in mesh.vertices]
    lines.append(f"CELLS {nt} {4 * nt}")
    lines += [f"3 {i} {j} {k}" for i, j, k in mesh.triangles]
    lines.append(f"CELL_TYPES {nt}")
    lines += ["5"] * nt
    lines.append(f"POINT_DATA {nv}")
    lines.append("VECTORS velocity double")
    lines += [f"{_fmt(a)} {_fmt(b)} 0" for a, b in zip(ux[:nv], uy[:nv])]
    lines.append("SCALARS pressure double 1")
    lines.append("LOOKUP_TABLE default")
    lines += [_fmt(p) for p in pressure.coeffs]
    Path(path).write_text("\n".join(lines) + "\n")
