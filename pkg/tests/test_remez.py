import numpy as np
import pytest
from numpy.polynomial import Polynomial

from chebband.domain import IntervalSystem
from chebband.remez import analyze_zeros, minimax_monic
from chebband.weights import FunctionWeight, PolynomialWeight

from conftest import GENUS1, GENUS2

SYM = IntervalSystem((-1.0, -0.5, 0.5, 1.0))


def test_interval_cubic():
    r = minimax_monic(IntervalSystem((-1.0, 1.0)), None, 3)
    assert r.converged
    assert r.deviation == pytest.approx(0.25, rel=1e-12)
    assert np.allclose(r.power_coeffs(), [0.0, -0.75, 0.0, 1.0], atol=1e-13)


def test_symmetric_two_band_quadratic():
    r = minimax_monic(SYM, None, 2)
    assert r.deviation == pytest.approx(0.375, rel=1e-12)
    assert np.allclose(r.power_coeffs(), [-0.625, 0.0, 1.0], atol=1e-13)


def test_symmetric_two_band_cubic_is_odd():
    r = minimax_monic(SYM, None, 3)
    pc = r.power_coeffs()
    assert np.allclose(pc[::2], 0.0, atol=1e-12)
    assert len(r.gap_zeros[0]) == 1 and r.gap_zeros[0][0] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("ends,n", [(GENUS1, 9), (GENUS1, 24), (GENUS2, 15)])
def test_certificate_and_alternation(ends, n):
    r = minimax_monic(IntervalSystem(ends), None, n)
    assert r.converged
    assert r.vp_lower <= r.deviation
    assert (r.deviation - r.vp_lower) / r.deviation <= 1e-8
    assert len(r.alternation) == n + 1
    assert np.all(np.diff(r.alternation) > 0)
    assert np.all(r.signs[1:] == -r.signs[:-1])
    vals = r(r.alternation)
    assert np.allclose(np.abs(vals), r.deviation, rtol=1e-8)
    assert np.all(np.sign(vals) == r.signs)
    # at most one zero per gap, all zeros accounted for
    assert all(len(g) <= 1 for g in r.gap_zeros)
    assert sum(r.zeros_per_band) + sum(len(g) for g in r.gap_zeros) <= n


def test_weighted_alternation_and_sup_norm():
    s = IntervalSystem(GENUS1)
    W = FunctionWeight(np.exp)
    r = minimax_monic(s, W, 12)
    x = np.concatenate([np.linspace(lo, hi, 4000) for lo, hi in s.bands])
    assert np.max(np.abs(r(x) / W(x))) == pytest.approx(r.deviation, rel=1e-7)


def test_polynomial_weight_divides():
    # with rho = x^2 + 1 the minimax of M / rho on [-1, 1] has the right level
    s = IntervalSystem((-1.0, 1.0))
    rho = PolynomialWeight.from_polynomial(Polynomial([1.0, 0.0, 1.0]))
    r = minimax_monic(s, rho, 6)
    x = np.linspace(-1, 1, 5001)
    assert np.max(np.abs(r(x) / rho(x))) == pytest.approx(r.deviation, rel=1e-8)


def test_analyze_zeros_matches_result():
    r = minimax_monic(IntervalSystem(GENUS2), None, 11)
    per_band, gaps = analyze_zeros(r)
    assert list(per_band) == list(r.zeros_per_band)
    assert [list(g) for g in gaps] == [list(g) for g in r.gap_zeros]


def test_json_fields():
    r = minimax_monic(SYM, None, 4)
    js = r.to_json()
    assert js["n"] == 4 and len(js["alternation"]) == 5 and js["converged"] is True
