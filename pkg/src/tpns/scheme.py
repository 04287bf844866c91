"""Two-step projection scheme with a Dirichlet total-pressure condition.

Each step solves a linearized momentum problem for the intermediate
velocity ``u*_k`` (rotational convection lagged in its first argument), then
a pressure-Poisson problem for the total pressure ``P_k`` with Dirichlet
data on the flat boundary segments and natural conditions on the wall. The
end-of-step velocity ``u_k = u*_k - tau grad P_k`` is never formed as a
coefficient vector; it is only evaluated elementwise.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .assembly import (
    AssembledForms,
    apply_constraints,
    assemble_convection,
    assemble_forms,
    assemble_load,
    assemble_vector_rhs,
)
from .fem import (
    FeSystem,
    Field,
    FieldKind,
    build_pressure_constraints,
    build_velocity_constraints,
    interpolate_p2,
)
from .sparse import CGOperator, LUFactor, SolverError, relative_residual

log = logging.getLogger(__name__)


class ConfigurationError(ValueError):
    pass


class StepFailure(SolverError):
    def __init__(self, k: int, stage: str, cause: Exception):
        super().__init__(f"step {k}: {stage} solve failed: {cause}")
        self.k = k
        self.stage = stage


def _zero_vector(x, y, t):
    z = np.zeros_like(np.asarray(x, dtype=float))
    return z, z


def _zero_scalar(x, y, t):
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ProblemData:
    """Forcing f(x, y, t), boundary total pressure pb(x, y, t), initial velocity u0(x, y)."""

    forcing: Callable
    boundary_pressure: Callable
    initial_velocity: Callable

    @classmethod
    def unforced(cls, initial_velocity: Callable) -> "ProblemData":
        return cls(_zero_vector, _zero_scalar, initial_velocity)

    @classmethod
    def zero(cls) -> "ProblemData":
        return cls(_zero_vector, _zero_scalar, lambda x, y: _zero_vector(x, y, 0.0))


@dataclass(frozen=True)
class SchemeConfig:
    tau: float
    n_steps: int
    nu: float = 1.0
    rho: float = 1.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigurationError(f"tau must be positive, got {self.tau}")
        if not self.tau < 1:
            raise ConfigurationError(f"tau must be < 1, got {self.tau}")
        if self.n_steps < 1:
            raise ConfigurationError(f"need at least one step, got {self.n_steps}")
        if self.nu != 1.0 or self.rho != 1.0:
            raise ConfigurationError("only nu = rho = 1 is supported")

    @property
    def T(self) -> float:
        return self.tau * self.n_steps

    @classmethod
    def from_final_time(cls, T: float, tau: float) -> "SchemeConfig":
        if not 0 < tau < 1:
            raise ConfigurationError(f"tau must satisfy 0 < tau < 1, got {tau}")
        n = round(T / tau)
        if n < 1 or abs(n * tau - T) > 1e-12 * max(T, 1.0):
            raise ConfigurationError(f"tau={tau} does not divide T={T}")
        return cls(tau=tau, n_steps=n)


class CompositeVelocity:
    """``u* - tau grad P``: a P2 field minus a piecewise-constant gradient."""

    def __init__(self, ustar: Field, pressure: Field, tau: float):
        self.ustar = ustar
        self.pressure = pressure
        self.tau = tau

    def values_at(self, fe: FeSystem) -> np.ndarray:
        gp = fe.eval_pressure_grad(self.pressure.coeffs)
        return fe.eval_velocity(self.ustar.coeffs) - self.tau * gp[:, None, :]


@dataclass
class SchemeState:
    k: int
    ustar: Field
    pressure: Field
    prev_ustar: Field | None = None
    prev_pressure: Field | None = None


@dataclass(frozen=True)
class StepReport:
    k: int
    t: float
    res_vel: float
    res_press: float
    norm_ustar: float
    norm_u: float
    norm_div_ustar: float


def l2_norm(values: np.ndarray, fe: FeSystem) -> float:
    sq = values**2
    if sq.ndim == 3:
        sq = sq.sum(axis=-1)
    return float(np.sqrt(max(fe.integrate(sq), 0.0)))


class ProjectionScheme:
    """Fully discrete scheme on a fixed mesh and time step.

    ``pressure_solver`` is ``"direct"`` (sparse LU, factored once) or ``"cg"``.
    """

    def __init__(
        self,
        fe: FeSystem,
        data: ProblemData,
        config: SchemeConfig,
        pressure_solver: str = "direct",
        forms: AssembledForms | None = None,
        convection: Callable = assemble_convection,
    ):
        if pressure_solver not in ("direct", "cg"):
            raise ConfigurationError(f"unknown pressure solver {pressure_solver!r}")
        self.fe = fe
        self.data = data
        self.config = config
        self.forms = forms if forms is not None else assemble_forms(fe)
        self.convection = convection
        self.vel_constraints = build_velocity_constraints(fe.mesh, fe.dofmap)
        self.press_constraints = build_pressure_constraints(fe.mesh, fe.dofmap, data.boundary_pressure)

        tau = config.tau
        self._press_matrix, _ = apply_constraints(
            tau * self.forms.L, np.zeros(fe.dofmap.n_pressure), self.press_constraints
        )
        if pressure_solver == "direct":
            self._press_solver = LUFactor(self._press_matrix)
        else:
            self._press_solver = CGOperator(self._press_matrix)

    @property
    def tau(self) -> float:
        return self.config.tau

    def time(self, k: int) -> float:
        return k * self.config.tau

    def init_state(self) -> SchemeState:
        dm = self.fe.dofmap
        u0 = self.data.initial_velocity
        ustar = interpolate_p2(lambda x, y, t: u0(x, y), 0.0, dm)
        return SchemeState(0, ustar, Field.zeros(FieldKind.PressureP1, dm))

    def velocity_system(self, state: SchemeState, t_k: float, recovered: bool = False):
        """Constrained momentum matrix and right-hand side for the next step.

        ``recovered=True`` builds the mass term from the end-of-step velocity
        ``u_{k-1}`` by quadrature instead of ``u*_{k-1}`` and ``grad P_{k-1}``.
        """
        f = self.forms
        tau = self.tau
        mat = f.M / tau + f.A + self.convection(state.ustar, self.fe)
        rhs = assemble_load(self.data.forcing, t_k, self.fe)
        if recovered:
            u_prev = CompositeVelocity(state.ustar, state.pressure, tau).values_at(self.fe)
            rhs += assemble_vector_rhs(u_prev, self.fe) / tau
        else:
            rhs += f.M @ state.ustar.coeffs / tau - f.G @ state.pressure.coeffs
        return apply_constraints(mat.tocsr(), rhs, self.vel_constraints)

    def velocity_step(self, state: SchemeState, t_k: float, recovered: bool = False) -> tuple[Field, float]:
        mat, rhs = self.velocity_system(state, t_k, recovered)
        x = LUFactor(mat).solve(rhs)
        return Field(x, FieldKind.VelocityP2, self.fe.dofmap), relative_residual(mat, x, rhs)

    def pressure_step(self, ustar: Field, t_k: float) -> tuple[Field, float]:
        rhs = -(self.forms.B @ ustar.coeffs)
        values = self.press_constraints.values(t_k)
        _, rhs = apply_constraints(self.config.tau * self.forms.L, rhs, self.press_constraints, values)
        x = self._press_solver.solve(rhs)
        return (
            Field(x, FieldKind.PressureP1, self.fe.dofmap),
            relative_residual(self._press_matrix, x, rhs),
        )

    def recover_velocity(self, state: SchemeState) -> CompositeVelocity:
        return CompositeVelocity(state.ustar, state.pressure, self.tau)

    def step(self, state: SchemeState, recovered: bool = False) -> tuple[SchemeState, StepReport]:
        k = state.k + 1
        t_k = self.time(k)
        try:
            ustar, res_v = self.velocity_step(state, t_k, recovered)
        except SolverError as exc:
            raise StepFailure(k, "velocity", exc) from exc
        try:
            pressure, res_p = self.pressure_step(ustar, t_k)
        except SolverError as exc:
            raise StepFailure(k, "pressure", exc) from exc
        new = SchemeState(k, ustar, pressure, state.ustar, state.pressure)
        fe = self.fe
        g = fe.eval_velocity_grad(ustar.coeffs)
        report = StepReport(
            k=k,
            t=t_k,
            res_vel=res_v,
            res_press=res_p,
            norm_ustar=l2_norm(fe.eval_velocity(ustar.coeffs), fe),
            norm_u=l2_norm(self.recover_velocity(new).values_at(fe), fe),
            norm_div_ustar=l2_norm(g[..., 0, 0] + g[..., 1, 1], fe),
        )
        return new, report

    def run(
        self,
        callbacks: Iterable[Callable[[int, SchemeState], None]] = (),
        state: SchemeState | None = None,
        n_steps: int | None = None,
        recovered: bool = False,
    ) -> list[StepReport]:
        """Advance ``n_steps`` (default: to the final time) and call ``cb(k, state)`` after each step."""
        state = self.init_state() if state is None else state
        n_steps = self.config.n_steps - state.k if n_steps is None else n_steps
        callbacks = list(callbacks)
        reports = []
        for _ in range(n_steps):
            state, report = self.step(state, recovered)
            log.debug("step %d: res_vel=%.2e res_press=%.2e", report.k, report.res_vel, report.res_press)
            for cb in callbacks:
                cb(state.k, state)
            reports.append(report)
        self.final_state = state
        return reports
