import math

import numpy as np
import pytest
from numpy.polynomial import Polynomial

from chebband.asymptotics import (
    alternation_points, build_model, pell_residual, predict_deviation, predict_off_E, predict_on_E,
    predict_zero_counts, rational_deviation, rational_P,
)
from chebband.domain import IntervalSystem
from chebband.potential import BoundaryError, build_table
from chebband.remez import minimax_monic
from chebband.weights import FunctionWeight, PolynomialWeight


def test_interval_is_exact():
    t = build_table(IntervalSystem((-1.0, 1.0)))
    for n in (1, 4, 9):
        m = build_model(t, None, n)
        assert predict_deviation(m) == pytest.approx(2.0 ** (1 - n), rel=1e-10)
        pts = alternation_points(m)
        assert np.allclose(np.sort(pts), np.sort(np.cos(np.arange(n + 1) * math.pi / n)), atol=1e-9)
        z = 1.7
        cheb = math.cosh(n * math.acosh(z))
        # both branches kept: exact; one branch drops 0.5 exp(-n g)
        assert predict_off_E(m, z, dominance=1e300).real == pytest.approx(cheb, rel=1e-12)
        assert abs(predict_off_E(m, z).real - cheb) <= 0.5 * math.exp(-n * math.acosh(z)) * 1.001


def test_off_E_against_remez(table1):
    n = 40
    r = minimax_monic(table1.system, None, n, omega=table1.omega_inf)
    m = build_model(table1, None, n)
    for z in (1.3, -1.5, -0.2):
        assert predict_off_E(m, z).real == pytest.approx(float(r.normalized(np.array([z]))[0]), rel=1e-6)
    x = np.array([-0.9, -0.6, 0.4, 0.8])
    assert np.max(np.abs(0.5 * predict_on_E(m, x) - r.normalized(x))) <= 1e-6


def test_predict_on_E_rejects_gap(table1):
    m = build_model(table1, None, 10)
    with pytest.raises(BoundaryError):
        predict_on_E(m, np.array([0.0]))


def test_zero_count_prediction_sums_to_degree(table2):
    for n in (12, 17):
        m = build_model(table2, None, n)
        zc = predict_zero_counts(m)
        assert zc.per_band.sum() + int(np.sum(zc.gap_zero)) == n
        assert zc.defect <= 1e-9


def test_rational_weight_identities(table1):
    rho = PolynomialWeight.from_polynomial(Polynomial([1.0, 0.0, 1.0]))
    n = 14
    m = build_model(table1, rho, n)
    x = np.concatenate([np.cos((np.arange(200) + 0.5) * math.pi / 200) * 0.3 - 0.7,
                        np.cos((np.arange(200) + 0.5) * math.pi / 200) * 0.4 + 0.6])
    assert pell_residual(m, x) <= 1e-12
    v = rational_P(m, x)
    coef = np.polynomial.chebyshev.chebfit(x, v, n + 1)
    assert np.max(np.abs(np.polynomial.chebyshev.chebval(x, coef) - v)) <= 1e-10 * np.max(np.abs(v))
    assert rational_deviation(m) == predict_deviation(m)


def test_trig_form_needs_polynomial_weight(table1):
    m = build_model(table1, FunctionWeight(np.exp), 8)
    with pytest.raises(TypeError):
        rational_P(m, np.array([0.5]))
