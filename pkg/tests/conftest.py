import math

import hypothesis
import numpy as np
import pytest

from tpns.fem import FeSystem
from tpns.manufactured import SectorProblem
from tpns.mesh import generate_sector_mesh

hypothesis.settings.register_profile("ci", max_examples=25, deadline=None)
hypothesis.settings.load_profile("ci")


@pytest.fixture(scope="session")
def problem():
    return SectorProblem()


def sector_fe(h):
    return FeSystem(generate_sector_mesh(2.0, 3.0, 0.0, math.pi / 2, h))


@pytest.fixture(scope="session")
def coarse_fe():
    """n_r = 2, n_theta = 10."""
    return sector_fe(0.5)


@pytest.fixture(scope="session")
def small_fe():
    return sector_fe(0.25)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
