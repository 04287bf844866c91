"""Exact azimuthal flow in a quarter annulus driven by a total-pressure drop.

The velocity is ``U(r) e^{-t} (sin(theta), -cos(theta))``, the static pressure varies
linearly in the polar angle, and the forcing supplies exactly the
time-derivative and inertial terms so the Stokes part balances on its own.
All constants are derived from the primitive parameters at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .scheme import ProblemData


@dataclass(frozen=True)
class SectorProblem:
    r1: float = 2.0
    r2: float = 3.0
    theta1: float = 0.0
    theta2: float = math.pi / 2
    p_in: float = 1.0
    p_out: float = -1.0
    alpha: float = field(init=False)
    C: float = field(init=False)
    D: float = field(init=False)

    def __post_init__(self):
        r1, r2 = self.r1, self.r2
        if not 0 < r1 < r2:
            raise ValueError("need 0 < r1 < r2")
        if not self.theta1 < self.theta2:
            raise ValueError("need theta1 < theta2")
        # Momentum balance -lap(u) + grad(p) = 0 with p rising from p_out at
        # theta1 to p_in at theta2 requires U'' + U'/r - U/r^2 = alpha/r with
        # alpha = dp0/dtheta taken with the opposite sign.
        object.__setattr__(self, "alpha", (self.p_out - self.p_in) / (self.theta2 - self.theta1))
        object.__setattr__(
            self, "C", 0.5 * r1**2 * r2**2 * (math.log(r2) - math.log(r1)) / (r2**2 - r1**2)
        )
        object.__setattr__(
            self, "D", -0.5 * (r2**2 * math.log(r2) - r1**2 * math.log(r1)) / (r2**2 - r1**2)
        )

    def U(self, r):
        r = np.asarray(r, dtype=np.result_type(r, float))
        if np.any(r <= 0):
            raise ValueError("radial profile needs r > 0")
        return self.alpha * (0.5 * r * np.log(r) + self.C / r + self.D * r)

    def p0(self, theta):
        theta = np.asarray(theta, dtype=float)
        return (self.p_in * (theta - self.theta1) + self.p_out * (self.theta2 - theta)) / (
            self.theta2 - self.theta1
        )

    @staticmethod
    def _polar(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.hypot(x, y)
        if np.any(r == 0):
            raise ValueError("the origin is excluded")
        return r, np.arctan2(y, x)

    def exact_velocity(self, x, y, t):
        r, th = self._polar(x, y)
        a = self.U(r) * np.exp(-t)
        return a * np.sin(th), -a * np.cos(th)

    def exact_static_pressure(self, x, y, t):
        _, th = self._polar(x, y)
        return self.p0(th) * np.exp(-t)

    def exact_total_pressure(self, x, y, t):
        r, th = self._polar(x, y)
        return self.p0(th) * np.exp(-t) + 0.5 * self.U(r) ** 2 * np.exp(-2 * t)

    def forcing(self, x, y, t):
        r, th = self._polar(x, y)
        u = self.U(r)
        cent = u**2 / r * np.exp(-2 * t)
        lin = u * np.exp(-t)
        return -cent * np.cos(th) - lin * np.sin(th), -cent * np.sin(th) + lin * np.cos(th)

    def boundary_pb(self, x, y, t):
        return self.exact_total_pressure(x, y, t)

    def initial_u0(self, x, y):
        return self.exact_velocity(x, y, 0.0)

    def data(self) -> ProblemData:
        return ProblemData(
            forcing=self.forcing,
            boundary_pressure=self.boundary_pb,
            initial_velocity=self.initial_u0,
        )

    def unforced_data(self) -> ProblemData:
        """Zero forcing and zero boundary pressure, manufactured initial velocity."""
        return ProblemData.unforced(self.initial_u0)


def ode_residual(problem: SectorProblem, r, step: float = 1e-5):
    """Central-difference residual of U'' + U'/r - U/r^2 - alpha/r.

    Evaluated in extended precision: in doubles the three terms of U cancel
    to a few percent, and the second difference amplifies that rounding by
    1/step^2.
    """
    r = np.asarray(r, dtype=np.longdouble)
    step = np.longdouble(step)
    u = problem.U
    d1 = (u(r + step) - u(r - step)) / (2 * step)
    d2 = (u(r + step) - 2 * u(r) + u(r - step)) / step**2
    return (d2 + d1 / r - u(r) / r**2 - problem.alpha / r).astype(float)


def fd_divergence(problem: SectorProblem, x, y, t, step: float = 1e-5):
    ux_p, _ = problem.exact_velocity(x + step, y, t)
    ux_m, _ = problem.exact_velocity(x - step, y, t)
    _, uy_p = problem.exact_velocity(x, y + step, t)
    _, uy_m = problem.exact_velocity(x, y - step, t)
    return (ux_p - ux_m + uy_p - uy_m) / (2 * step)


def fd_momentum_residual(problem: SectorProblem, x, y, t, step: float = 1e-4) -> np.ndarray:
    """du/dt + (u.grad)u - lap(u) + grad(p) - f by central differences, shape (2, ...)."""
    def u(xx, yy, tt):
        return np.array(problem.exact_velocity(xx, yy, tt))

    p = problem.exact_static_pressure
    u0 = u(x, y, t)
    ut = (u(x, y, t + step) - u(x, y, t - step)) / (2 * step)
    uxp, uxm = u(x + step, y, t), u(x - step, y, t)
    uyp, uym = u(x, y + step, t), u(x, y - step, t)
    dudx = (uxp - uxm) / (2 * step)
    dudy = (uyp - uym) / (2 * step)
    lap = (uxp + uxm + uyp + uym - 4 * u0) / step**2
    gp = np.array(
        [
            (p(x + step, y, t) - p(x - step, y, t)) / (2 * step),
            (p(x, y + step, t) - p(x, y - step, t)) / (2 * step),
        ]
    )
    return ut + u0[0] * dudx + u0[1] * dudy - lap + gp - np.array(problem.forcing(x, y, t))
