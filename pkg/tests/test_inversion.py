import math

import numpy as np
import pytest

from chebband.domain import IntervalSystem
from chebband.inversion import (
    abel_forward, abel_sum, gap_point_distance, periodic_schedule, solve_for_n, solve_inversion, torus_defect,
)
from chebband.potential import build_table, harmonic_measures
from chebband.weights import PolynomialWeight, UnitWeight

from conftest import GENUS2


def test_abel_sum_is_harmonic_measure_sum(table2):
    c = np.array([-0.45, 0.25])
    expect = harmonic_measures(table2, c[0])[:2] + harmonic_measures(table2, c[1])[:2]
    assert np.allclose(abel_sum(table2, c), expect, atol=1e-12)


def test_round_trip_genus2(table2):
    rng = np.random.default_rng(11)
    for _ in range(10):
        th = rng.uniform(0.1, math.pi - 0.1, 2)
        F = abel_forward(table2, th)[0]
        sol = solve_inversion(table2, np.mod(F, 2.0), 2)
        assert torus_defect(abel_sum(table2, sol.c), np.mod(F, 2.0), 2.0) <= 1e-11
        c0 = [0.5 * (L + R) + 0.5 * (R - L) * math.cos(t) for (L, R), t in zip(table2.system.gaps, th)]
        assert np.allclose(sol.c, c0, atol=1e-10)


def test_symmetric_odd_degree_gap_point_at_centre():
    t = build_table(IntervalSystem((-1.0, -0.5, 0.5, 1.0)))
    for n in (3, 5, 9):
        sol = solve_for_n(t, UnitWeight(), n)
        assert not sol.endpoint_flags[0]
        assert sol.c[0] == pytest.approx(0.0, abs=1e-10)
    even = solve_for_n(t, UnitWeight(), 4)
    assert even.endpoint_flags[0]


def test_solve_for_n_weighted(table1):
    rho = PolynomialWeight.from_polynomial(np.polynomial.Polynomial([1.0, 0.0, 1.0]))
    for n in (6, 13):
        sol = solve_for_n(table1, rho, n)
        assert sol.residual <= 1e-10 and sol.mod1_residual <= 1e-10
        lo, hi = table1.system.gaps[0]
        assert lo <= sol.c[0] <= hi
        js = sol.to_json()
        assert js["n"] == n and len(js["c"]) == 1


def test_multi_start_uniqueness(table2):
    target = np.array([0.3, 0.7])
    ref = solve_inversion(table2, target, 2)
    for x0 in ([0.2, 2.0], [2.5, 0.5], [1.0, 1.0]):
        assert np.allclose(solve_inversion(table2, target, 2, x0=np.array(x0)).c, ref.c, atol=1e-10)


def test_periodic_schedule(table_t3):
    ps = periodic_schedule(table_t3, UnitWeight(), 3, 4)
    assert ps.period == 3 and ps.c.shape == (3, 2)
    assert ps.max_deviation <= 1e-8


def test_periodic_schedule_rejects_irrational():
    t = build_table(IntervalSystem(GENUS2))
    with pytest.raises(ValueError):
        periodic_schedule(t, UnitWeight(), 3, 2)


def test_gap_point_distance_ignores_end_side(table1):
    from dataclasses import replace
    a = solve_for_n(table1, UnitWeight(), 4)
    lo, hi = table1.system.gaps[0]
    at_lo = replace(a, c=np.array([lo]), endpoint_flags=np.array([True]))
    at_hi = replace(a, c=np.array([hi]), endpoint_flags=np.array([True]))
    inner = replace(a, c=np.array([0.5 * (lo + hi)]), endpoint_flags=np.array([False]))
    assert gap_point_distance(at_lo, at_hi) == 0.0
    assert gap_point_distance(at_lo, inner) == pytest.approx(0.5 * (hi - lo))
