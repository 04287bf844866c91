"""Acceptance criteria 1-9, each at its stated tolerance.

Every test prints (and records for the terminal summary) one PASS/FAIL line.
The default study on h = 2^-5 with five time steps takes about two minutes.
"""

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, sector_fe
from tpns.manufactured import SectorProblem
from tpns.verification import (
    SLOPE_WINDOWS,
    check_manufactured,
    check_quadrature,
    check_skew_symmetry,
    convergence_study,
    energy_decay_run,
)

DEFAULT_H = 2.0**-5


def record(n: int, ok: bool, text: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {text}"
    ACCEPTANCE_LINES[n] = line
    print(line)


@pytest.fixture(scope="module")
def default_fe():
    return sector_fe(DEFAULT_H)


@pytest.fixture(scope="module")
def study(default_fe):
    return convergence_study(SectorProblem(), fe=default_fe)


@pytest.fixture(scope="module")
def decay():
    return energy_decay_run(SectorProblem(), mesh_h=2.0**-4, tau=1 / 16, n_steps=16)


def slope_text(study, cols):
    parts = []
    for c in cols:
        lo, hi = SLOPE_WINDOWS[c]
        parts.append(f"{c} slope={study.slopes[c]:.3f} in [{lo}, {hi}]")
    return "; ".join(parts)


def slopes_ok(study, cols):
    return all(SLOPE_WINDOWS[c][0] <= study.slopes[c] <= SLOPE_WINDOWS[c][1] for c in cols)


@pytest.mark.slow
def test_criterion_1_velocity_rate(study):
    cols = ("err_u_L2L2", "err_ustar_L2L2")
    ok = slopes_ok(study, cols)
    record(1, ok, slope_text(study, cols))
    assert study.taus == [2.0**-k for k in range(2, 7)]
    assert ok


@pytest.mark.slow
def test_criterion_2_pressure_rate(study):
    ok = slopes_ok(study, ("err_P_L2L2",))
    record(2, ok, slope_text(study, ("err_P_L2L2",)))
    assert ok


@pytest.mark.slow
def test_criterion_3_h1_rate(study):
    ok = slopes_ok(study, ("err_ustar_L2H1",))
    record(3, ok, slope_text(study, ("err_ustar_L2H1",)))
    assert ok


@pytest.mark.slow
def test_criterion_4_splitting_gap_rate(study):
    ok = slopes_ok(study, ("err_u_minus_ustar",))
    record(4, ok, slope_text(study, ("err_u_minus_ustar",)))
    assert ok


def test_criterion_5_skew_symmetry(default_fe):
    check = check_skew_symmetry(default_fe, n_draws=100, seed=2024)
    record(5, check.passed, f"max |v^T N(w) v| / (|v|^2 max|curl w|) = {check.measured:.2e} <= 1e-12")
    assert check.passed


def test_criterion_6_energy_decay(decay):
    ok = decay.max_growth <= 1e-10 and len(decay.reports) == 16
    record(6, ok, f"max relative growth of ||u_k|| = {decay.max_growth:.2e} <= 1e-10")
    assert ok


def test_criterion_7_manufactured_integrity():
    problem = SectorProblem()
    checks = check_manufactured(problem, n_points=20)
    ok = all(c.passed for c in checks)
    record(7, ok, "; ".join(f"{c.name}={c.measured:.1e} (tol {c.tolerance:.0e})" for c in checks))
    assert ok


@pytest.mark.slow
def test_criterion_8_solver_hygiene(study, decay):
    res = max(max(r.max_res_vel, r.max_res_press) for r in study.rows)
    res = max(res, max(max(r.res_vel, r.res_press) for r in decay.reports))
    quad = check_quadrature(6)
    ok = res <= 1e-10 and quad.passed
    record(8, ok, f"max relative residual = {res:.1e} <= 1e-10; degree-6 monomial error = {quad.measured:.1e} <= 1e-13")
    assert ok


def test_criterion_9_projection_property(decay):
    ok = decay.max_orthogonality <= 1e-9
    record(9, ok, f"max |(u_k, grad psi)| / (|u_k| |grad psi|) = {decay.max_orthogonality:.2e} <= 1e-9")
    assert ok
    assert np.isfinite(decay.max_orthogonality)
