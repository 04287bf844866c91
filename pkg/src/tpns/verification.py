"""Error norms, the time-step convergence study, and the property suite."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from math import factorial
from typing import Callable

import numpy as np

from .assembly import assemble_convection, vorticity_at
from .fem import FeSystem, Field, FieldKind, interpolate_p1, interpolate_p2
from .manufactured import SectorProblem, fd_divergence, fd_momentum_residual
from .mesh import generate_sector_mesh
from .quadrature import quadrature
from .scheme import (
    CompositeVelocity,
    ConfigurationError,
    ProjectionScheme,
    SchemeConfig,
    SchemeState,
    StepReport,
    l2_norm,
)

log = logging.getLogger(__name__)

ERROR_COLUMNS = ("err_u_L2L2", "err_ustar_L2L2", "err_P_L2L2", "err_ustar_L2H1", "err_u_minus_ustar")

# expected temporal rates: first order for velocities, one half for pressure
SLOPE_WINDOWS = {
    "err_u_L2L2": (0.80, 1.20),
    "err_ustar_L2L2": (0.80, 1.20),
    "err_P_L2L2": (0.35, 0.65),
    "err_ustar_L2H1": (0.70, 1.20),
    "err_u_minus_ustar": (0.80, 1.20),
}


def _is_velocity(numeric) -> bool:
    return isinstance(numeric, CompositeVelocity) or numeric.kind is FieldKind.VelocityP2


def _interpolant(numeric, exact: Callable, t: float, fe: FeSystem) -> Field:
    if _is_velocity(numeric):
        return interpolate_p2(exact, t, fe.dofmap)
    return interpolate_p1(exact, t, fe.dofmap)


def field_error_l2(numeric, exact: Callable, t: float, fe: FeSystem) -> float:
    """L2 distance between a discrete field and the Lagrange interpolant of ``exact``."""
    diff = numeric.values_at(fe) - _interpolant(numeric, exact, t, fe).values_at(fe)
    return l2_norm(diff, fe)


def field_error_h1(numeric: Field, exact: Callable, t: float, fe: FeSystem) -> float:
    interp = _interpolant(numeric, exact, t, fe)
    dv = numeric.values_at(fe) - interp.values_at(fe)
    dg = numeric.grads_at(fe) - interp.grads_at(fe)
    sq = fe.integrate((dv**2).reshape(*dv.shape[:2], -1).sum(-1))
    sq += fe.integrate((dg**2).reshape(*dg.shape[:2], -1).sum(-1))
    return math.sqrt(max(sq, 0.0))


@dataclass
class ErrorAccumulator:
    """Running sums of tau * ||e_k||^2 over the steps (piecewise-constant in time)."""

    problem: SectorProblem
    fe: FeSystem
    tau: float
    sums: dict = field(default_factory=lambda: dict.fromkeys(ERROR_COLUMNS, 0.0))
    steps: int = 0

    def accumulate(self, k: int, state: SchemeState) -> None:
        p, fe, tau = self.problem, self.fe, self.tau
        t = k * tau
        u_k = CompositeVelocity(state.ustar, state.pressure, tau)
        self.sums["err_u_L2L2"] += tau * field_error_l2(u_k, p.exact_velocity, t, fe) ** 2
        self.sums["err_ustar_L2L2"] += tau * field_error_l2(state.ustar, p.exact_velocity, t, fe) ** 2
        self.sums["err_P_L2L2"] += tau * field_error_l2(state.pressure, p.exact_total_pressure, t, fe) ** 2
        self.sums["err_ustar_L2H1"] += tau * field_error_h1(state.ustar, p.exact_velocity, t, fe) ** 2
        gp = fe.eval_pressure_grad(state.pressure.coeffs)
        self.sums["err_u_minus_ustar"] += tau * (tau**2) * float(np.sum(fe.area * (gp**2).sum(-1)))
        self.steps += 1

    __call__ = accumulate

    def norms(self) -> dict:
        return {k: math.sqrt(v) for k, v in self.sums.items()}


def fit_slope(taus, errors) -> float:
    """Least-squares slope of log2(error) against log2(tau)."""
    taus = np.asarray(taus, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(taus) < 3 or len(taus) != len(errors):
        raise ValueError("need at least 3 (tau, error) pairs")
    if np.any(taus <= 0) or np.any(errors <= 0):
        raise ValueError("taus and errors must be positive")
    return float(np.polyfit(np.log2(taus), np.log2(errors), 1)[0])


@dataclass
class StudyRow:
    tau: float
    errors: dict
    max_res_vel: float
    max_res_press: float


@dataclass
class StudyResult:
    rows: list[StudyRow]
    slopes: dict
    mesh_h: float

    @property
    def taus(self) -> list[float]:
        return [r.tau for r in self.rows]

    def slopes_within(self, windows: dict = SLOPE_WINDOWS) -> dict:
        return {c: windows[c][0] <= s <= windows[c][1] for c, s in self.slopes.items()}

    def column(self, name: str) -> np.ndarray:
        return np.array([r.errors[name] for r in self.rows])


class StudyAborted(RuntimeError):
    def __init__(self, partial: StudyResult, cause: Exception):
        super().__init__(f"convergence study aborted: {cause}")
        self.partial = partial


def default_taus() -> list[float]:
    return [2.0**-k for k in range(2, 7)]


def convergence_study(
    problem: SectorProblem,
    mesh_h: float = 2.0**-5,
    tau_list=None,
    T: float = 1.0,
    pressure_solver: str = "direct",
    fe: FeSystem | None = None,
) -> StudyResult:
    """One full run per time step on a shared mesh; errors vs interpolated exact fields."""
    taus = sorted(default_taus() if tau_list is None else list(tau_list), reverse=True)
    if len(set(taus)) != len(taus):
        raise ValueError("duplicate time steps")
    configs = [SchemeConfig.from_final_time(T, tau) for tau in taus]
    if fe is None:
        mesh = generate_sector_mesh(problem.r1, problem.r2, problem.theta1, problem.theta2, mesh_h)
        fe = FeSystem(mesh)
    forms = None
    rows: list[StudyRow] = []
    data = problem.data()
    for cfg in configs:
        try:
            scheme = ProjectionScheme(fe, data, cfg, pressure_solver, forms=forms)
            forms = scheme.forms
            acc = ErrorAccumulator(problem, fe, cfg.tau)
            reports = scheme.run([acc])
        except Exception as exc:
            raise StudyAborted(_result(rows, fe), exc) from exc
        rows.append(
            StudyRow(
                cfg.tau,
                acc.norms(),
                max(r.res_vel for r in reports),
                max(r.res_press for r in reports),
            )
        )
        log.info("tau=%g %s", cfg.tau, acc.norms())
    return _result(rows, fe)


def _result(rows: list[StudyRow], fe: FeSystem) -> StudyResult:
    slopes = {}
    if len(rows) >= 3:
        taus = [r.tau for r in rows]
        slopes = {c: fit_slope(taus, [r.errors[c] for r in rows]) for c in ERROR_COLUMNS}
    return StudyResult(rows, slopes, fe.mesh.h)


# ---------------------------------------------------------------- properties


@dataclass
class PropertyCheck:
    name: str
    passed: bool
    measured: float
    tolerance: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: measured={self.measured:.3e} tol={self.tolerance:.1e}"


@dataclass
class PropertyReport:
    checks: list[PropertyCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> PropertyCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def random_constrained_velocity(scheme: ProjectionScheme, rng: np.random.Generator) -> Field:
    v = rng.standard_normal(scheme.fe.dofmap.n_velocity)
    v[scheme.vel_constraints.indices] = 0.0
    return Field(v, FieldKind.VelocityP2, scheme.fe.dofmap)


def check_skew_symmetry(
    fe: FeSystem, n_draws: int = 100, seed: int = 0, convection: Callable = assemble_convection
) -> PropertyCheck:
    """max |v^T N(w) v| / (||v||^2 max|curl w|) over random draws."""
    rng = np.random.default_rng(seed)
    n = fe.dofmap.n_velocity
    worst = 0.0
    for _ in range(n_draws):
        w = Field(rng.standard_normal(n), FieldKind.VelocityP2, fe.dofmap)
        v = rng.standard_normal(n)
        nmat = convection(w, fe)
        scale = float(v @ v) * float(np.abs(vorticity_at(w, fe)).max())
        worst = max(worst, abs(float(v @ (nmat @ v))) / scale)
    return PropertyCheck("convection_skew_symmetry", worst <= 1e-12, worst, 1e-12)


def check_quadrature(degree: int = 6) -> PropertyCheck:
    rule = quadrature(degree)
    x, y = rule.reference_xy().T
    worst = 0.0
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            exact = factorial(a) * factorial(b) / factorial(a + b + 2)
            approx = 0.5 * float(np.sum(rule.weights * x**a * y**b))
            worst = max(worst, abs(approx - exact) / exact)
    return PropertyCheck(f"quadrature_exactness_deg{degree}", worst <= 1e-13, worst, 1e-13)


def check_manufactured(problem: SectorProblem, n_points: int = 20, seed: int = 1) -> list[PropertyCheck]:
    rng = np.random.default_rng(seed)
    noslip = max(abs(float(problem.U(problem.r1))), abs(float(problem.U(problem.r2))))
    r = rng.uniform(problem.r1 + 0.05, problem.r2 - 0.05, n_points)
    th = rng.uniform(problem.theta1 + 0.05, problem.theta2 - 0.05, n_points)
    t = rng.uniform(0.0, 1.0, n_points)
    x, y = r * np.cos(th), r * np.sin(th)
    mom = float(np.abs(fd_momentum_residual(problem, x, y, t)).max())
    div = float(np.abs(fd_divergence(problem, x, y, t)).max())
    return [
        PropertyCheck("manufactured_noslip", noslip <= 1e-12, noslip, 1e-12),
        PropertyCheck("manufactured_momentum_residual", mom <= 1e-5, mom, 1e-5),
        PropertyCheck("manufactured_divergence", div <= 1e-6, div, 1e-6),
    ]


@dataclass
class DecayRun:
    reports: list[StepReport]
    max_growth: float
    max_orthogonality: float


def orthogonality_defect(scheme: ProjectionScheme, state: SchemeState) -> float:
    """max over the pressure test basis of |(u_k, grad psi)| / (||u_k|| ||grad psi||)."""
    fe = scheme.fe
    u = scheme.recover_velocity(state).values_at(fe)
    norm_u = l2_norm(u, fe)
    if norm_u == 0.0:
        return 0.0
    # (u, grad chi_c) = sum over cells of grad chi_c . integral of u
    cell_int = np.einsum("tq,tqd->td", fe.wq, u)
    local = np.einsum("tad,td->ta", fe.dphi1, cell_int)
    pairing = np.zeros(fe.dofmap.n_pressure)
    np.add.at(pairing, fe.dofmap.cell_vertices, local)
    grad_norm = np.sqrt(scheme.forms.L.diagonal())
    free = np.ones(fe.dofmap.n_pressure, dtype=bool)
    free[scheme.press_constraints.indices] = False
    return float(np.max(np.abs(pairing[free]) / (norm_u * grad_norm[free])))


def energy_decay_run(
    problem: SectorProblem, mesh_h: float = 2.0**-4, tau: float = 1 / 16, n_steps: int = 16, fe=None
) -> DecayRun:
    if fe is None:
        fe = FeSystem(generate_sector_mesh(problem.r1, problem.r2, problem.theta1, problem.theta2, mesh_h))
    scheme = ProjectionScheme(fe, problem.unforced_data(), SchemeConfig(tau, n_steps))
    state0 = scheme.init_state()
    prev = [l2_norm(fe.eval_velocity(state0.ustar.coeffs), fe)]
    growth = [-math.inf]
    ortho = [0.0]

    def watch(k, state):
        cur = l2_norm(scheme.recover_velocity(state).values_at(fe), fe)
        growth[0] = max(growth[0], (cur - prev[0]) / prev[0])
        prev[0] = cur
        ortho[0] = max(ortho[0], orthogonality_defect(scheme, state))

    reports = scheme.run([watch])
    return DecayRun(reports, growth[0], ortho[0])


def property_suite(
    problem: SectorProblem | None = None,
    mesh_h: float = 2.0**-3,
    tau: float = 1 / 16,
    n_steps: int = 16,
    convection: Callable = assemble_convection,
) -> PropertyReport:
    problem = SectorProblem() if problem is None else problem
    if not tau < 1:
        raise ConfigurationError(f"tau must be < 1, got {tau}")
    fe = FeSystem(generate_sector_mesh(problem.r1, problem.r2, problem.theta1, problem.theta2, mesh_h))
    checks = [check_skew_symmetry(fe, convection=convection), check_quadrature(6)]
    checks += check_manufactured(problem)
    decay = energy_decay_run(problem, tau=tau, n_steps=n_steps, fe=fe)
    checks.append(PropertyCheck("energy_decay", decay.max_growth <= 1e-10, decay.max_growth, 1e-10))
    checks.append(
        PropertyCheck("discrete_orthogonality", decay.max_orthogonality <= 1e-9, decay.max_orthogonality, 1e-9)
    )
    res = max(max(r.res_vel, r.res_press) for r in decay.reports)
    checks.append(PropertyCheck("solver_residual", res <= 1e-10, res, 1e-10))
    return PropertyReport(checks)
