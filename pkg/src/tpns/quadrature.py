"""Symmetric quadrature rules on the reference triangle.

Points are barycentric triples ``(l0, l1, l2)``; the reference triangle has
vertices (0,0), (1,0), (0,1) so that ``x = l1`` and ``y = l2``. Weights sum
to 1 and must be scaled by the element area.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (n, 3) barycentric
    weights: np.ndarray  # (n,), sum to 1
    exact_degree: int

    @property
    def n_points(self) -> int:
        return len(self.weights)

    def reference_xy(self) -> np.ndarray:
        return self.points[:, 1:]


def _orbit3(a: float) -> list[tuple[float, float, float]]:
    b = (1.0 - a) / 2.0
    return [(a, b, b), (b, a, b), (b, b, a)]


def _orbit6(a: float, b: float) -> list[tuple[float, float, float]]:
    c = 1.0 - a - b
    return [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]


def _build(groups, degree: int) -> QuadratureRule:
    pts: list[tuple[float, float, float]] = []
    wts: list[float] = []
    for orbit, w in groups:
        pts.extend(orbit)
        wts.extend([w] * len(orbit))
    return QuadratureRule(np.array(pts), np.array(wts), degree)


# Dunavant rules; the degree-6 parameters are Newton-refined against the
# moment equations so every monomial up to degree 6 is exact to ~1e-14.
_RULES = {
    1: lambda: _build([([(1 / 3, 1 / 3, 1 / 3)], 1.0)], 1),
    2: lambda: _build([(_orbit3(2 / 3), 1 / 3)], 2),
    4: lambda: _build(
        [
            (_orbit3(0.108103018168070), 0.223381589678011),
            (_orbit3(0.816847572980459), 0.109951743655322),
        ],
        4,
    ),
    5: lambda: _build(
        [
            ([(1 / 3, 1 / 3, 1 / 3)], 0.225),
            (_orbit3(0.059715871789770), 0.132394152788506),
            (_orbit3(0.797426985353087), 0.125939180544827),
        ],
        5,
    ),
    6: lambda: _build(
        [
            (_orbit3(0.501426509658024), 0.11678627572624903),
            (_orbit3(0.8738219710170406), 0.050844906370175684),
            (_orbit6(0.05314504984487267, 0.3103524510337129), 0.08285107561845431),
        ],
        6,
    ),
}


def quadrature(min_degree: int) -> QuadratureRule:
    """Return the cheapest tabulated rule exact for polynomials of ``min_degree``."""
    if not 1 <= min_degree <= 6:
        raise ValueError(f"unsupported quadrature degree {min_degree} (need 1..6)")
    for degree in sorted(_RULES):
        if degree >= min_degree:
            return _RULES[degree]()
    raise AssertionError("unreachable")
