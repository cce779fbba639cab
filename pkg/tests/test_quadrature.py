import math

import numpy as np
import pytest

from chebband.quadrature import CosineSeries, cheb_integral, pv_integral, ray_integral, theta_of


def test_cheb_integral_moments():
    # int_{-1}^{1} x^2 / sqrt(1 - x^2) dx = pi / 2
    assert cheb_integral(lambda x: x ** 2, -1.0, 1.0) == pytest.approx(math.pi / 2, rel=1e-13)
    assert cheb_integral(lambda x: np.ones_like(x), 2.0, 5.0) == pytest.approx(math.pi, rel=1e-13)


def test_pv_integral_chebyshev_identity():
    # PV int T_1(x) / ((x - c) sqrt(1 - x^2)) dx = pi U_0(c) = pi
    for c in (-0.7, 0.1, 0.55):
        assert pv_integral(lambda x: x, -1.0, 1.0, c) == pytest.approx(math.pi, rel=1e-11)


def test_ray_integral_outside_band():
    # int_1^x dt / sqrt(t^2 - 1) = arccosh x, with F = 1 / sqrt(t + 1)
    x = 3.0
    val = ray_integral(lambda t: 1.0 / np.sqrt(t + 1.0), 1.0, x)
    assert val == pytest.approx(math.acosh(x), rel=1e-11)


def test_theta_of_round_trip():
    x = np.linspace(-0.3, 0.9, 7)
    t = theta_of(x, -0.3, 0.9)
    assert np.allclose(0.3 + 0.6 * np.cos(t), x)


def test_cosine_series_total():
    s = CosineSeries.fit(lambda x: 1.0 + x, -1.0, 1.0)
    assert float(s.total) == pytest.approx(math.pi, rel=1e-12)
