"""Singular quadrature on intervals with inverse-square-root endpoint behaviour.

Every integral over a band or gap [lo, hi] is written as

    int_lo^hi F(x) dx / sqrt((x - lo)(hi - x))  =  int_0^pi F(m + w cos t) dt,

with m the midpoint and w the half-width.  For F analytic near [lo, hi] the
right-hand side is the integral of a smooth even periodic function, so the
midpoint rule in t (Gauss-Chebyshev) converges geometrically.  Partial ranges of
t use Gauss-Legendre; one-sided endpoint singularities on rays use x = a + u^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.fft import dct


class QuadratureError(RuntimeError):
    """Adaptive refinement did not reach the requested tolerance."""

    def __init__(self, message: str, estimate=None, error: float | None = None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class QuadConfig:
    """Node counts and tolerance for the adaptive rules."""

    tol: float = 1e-14
    n_min: int = 48
    n_max: int = 2 ** 16
    # accepted accuracy once refinement stops improving (rounding-limited integrands)
    noise_tol: float = 1e-9


DEFAULT_QUAD = QuadConfig()


@lru_cache(maxsize=64)
def _legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _theta(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) * (math.pi / n)


def _close(new, old, tol: float) -> tuple[bool, float]:
    err = float(np.max(np.abs(np.asarray(new) - np.asarray(old))))
    scale = max(1.0, float(np.max(np.abs(new))))
    return err <= tol * scale, err


def cheb_integral(F: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                  quad: QuadConfig = DEFAULT_QUAD):
    """int_lo^hi F(x) dx / sqrt((x-lo)(hi-x)); F may return shape (..., N)."""
    m, w = 0.5 * (lo + hi), 0.5 * (hi - lo)
    n = quad.n_min
    prev = None
    err = math.inf
    while n <= quad.n_max:
        th = _theta(n)
        val = np.sum(F(m + w * np.cos(th)), axis=-1) * (math.pi / n)
        if prev is not None:
            ok, err = _close(val, prev, quad.tol)
            if ok:
                return val
        prev = val
        n *= 2
    raise QuadratureError(f"band rule did not converge on [{lo}, {hi}]", prev, err)


def cheb_partial(F: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                 t0: float, t1: float, quad: QuadConfig = DEFAULT_QUAD):
    """int_{t0}^{t1} F(m + w cos t) dt, i.e. the band rule restricted to part of [lo, hi]."""
    if t1 == t0:
        return np.sum(F(np.array([0.5 * (lo + hi)])), axis=-1) * 0.0
    m, w = 0.5 * (lo + hi), 0.5 * (hi - lo)
    half, mid = 0.5 * (t1 - t0), 0.5 * (t1 + t0)
    n = 24
    prev = None
    err = math.inf
    while n <= 4096:
        xg, wg = _legendre(n)
        t = mid + half * xg
        val = np.sum(F(m + w * np.cos(t)) * wg, axis=-1) * half
        if prev is not None:
            ok, err = _close(val, prev, quad.tol * 10)
            if ok:
                return val
        prev = val
        n *= 2
    raise QuadratureError(f"partial band rule did not converge on [{lo}, {hi}]", prev, err)


def theta_of(x, lo: float, hi: float):
    """Angle t in [0, pi] with x = m + w cos t."""
    m, w = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return np.arccos(np.clip((np.asarray(x, dtype=float) - m) / w, -1.0, 1.0))


def pv_integral(F: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, c: float,
                quad: QuadConfig = DEFAULT_QUAD):
    """Principal value of int_lo^hi F(x) / ((x - c) sqrt((x-lo)(hi-x))) dx for lo < c < hi.

    Uses PV int_0^pi dt / (cos t - cos t_c) = 0, so only the smooth difference
    quotient (F(x) - F(c)) / (x - c) is integrated.
    """
    m, w = 0.5 * (lo + hi), 0.5 * (hi - lo)
    tc = float(theta_of(c, lo, hi))
    Fc = F(np.array([c]))[..., 0]
    n = quad.n_min
    prev = None
    err = math.inf
    while n <= quad.n_max:
        nn = n
        # keep nodes away from t_c so the difference quotient stays well conditioned
        while np.min(np.abs(_theta(nn) - tc)) < 0.05 * math.pi / nn:
            nn += 1
        th = _theta(nn)
        x = m + w * np.cos(th)
        val = np.sum((F(x) - Fc[..., None]) / (x - c), axis=-1) * (math.pi / nn)
        if prev is not None:
            ok, err = _close(val, prev, quad.tol * 10)
            if ok:
                return val
        prev = val
        n *= 2
    raise QuadratureError("principal value did not converge", prev, err)


def ray_integral(F: Callable[[np.ndarray], np.ndarray], a: float, x: float,
                 quad: QuadConfig = DEFAULT_QUAD):
    """int_a^x F(s) ds / sqrt(|s - a|) for F smooth on the closed segment.

    The substitution s = a + sign * u^2 removes the endpoint singularity.  The
    sign of (x - a) is honoured, so the result is an oriented integral.
    """
    if x == a:
        return np.sum(F(np.array([a])), axis=-1) * 0.0
    sgn = 1.0 if x > a else -1.0
    U = math.sqrt(abs(x - a))
    n = 24
    prev = None
    err = math.inf
    while n <= 8192:
        xg, wg = _legendre(n)
        u = 0.5 * U * (xg + 1.0)
        s = a + sgn * u * u
        val = sgn * np.sum(2.0 * F(s) * wg, axis=-1) * (0.5 * U)
        if prev is not None:
            ok, err = _close(val, prev, quad.tol * 10)
            if ok:
                return val
        prev = val
        n *= 2
    raise QuadratureError("ray rule did not converge", prev, err)


def band_integral(f: Callable[[np.ndarray], np.ndarray], interval: tuple[float, float],
                  kind: str = "band", tol: float = 1e-13, pole: float | None = None):
    """Integrals over one interval with the inverse-square-root weight implied.

    ``kind`` "band" or "gap" returns int f(x) dx / sqrt((x-lo)(hi-x)); "principal_value"
    returns PV int f(x) dx / ((x - pole) sqrt((x-lo)(hi-x))).
    """
    lo, hi = interval
    q = QuadConfig(tol=tol)
    if kind in ("band", "gap"):
        return cheb_integral(f, lo, hi, q)
    if kind == "principal_value":
        if pole is None or not lo < pole < hi:
            raise ValueError("principal value needs a pole strictly inside the interval")
        return pv_integral(f, lo, hi, pole, q)
    raise ValueError(f"unknown integral kind {kind!r}")


class CosineSeries:
    """Cosine expansion F(t) = sum_m c_m cos(m t) of a smooth integrand on [0, pi].

    The variable t parametrizes an interval via x = m + w cos t.  Besides point
    values the expansion gives, in closed form,

    * cumulative integrals  int_0^t F(s) ds = c_0 t + sum_m c_m sin(m t) / m,
    * Glauert transforms    PV int_0^pi F(s) / (cos s - cos t) ds = pi sum_m c_m U_{m-1}(cos t).
    """

    def __init__(self, coef: np.ndarray, lo: float, hi: float):
        self.coef = np.asarray(coef, dtype=float)
        self.lo, self.hi = lo, hi

    @classmethod
    def fit(cls, F: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
            quad: QuadConfig = DEFAULT_QUAD) -> "CosineSeries":
        m, w = 0.5 * (lo + hi), 0.5 * (hi - lo)
        n = max(32, quad.n_min)
        prev_tail = math.inf
        while True:
            y = np.asarray(F(m + w * np.cos(_theta(n))), dtype=float)
            c = dct(y, type=2, axis=-1) / n
            c[..., 0] *= 0.5
            scale = max(1.0, float(np.max(np.abs(c))))
            tail = float(np.max(np.abs(c[..., (3 * n) // 4:])))
            stalled = n >= 1024 and tail > 0.5 * prev_tail and tail <= quad.noise_tol * scale
            if tail <= quad.tol * scale or stalled:
                floor = max(1e-3 * quad.tol * scale, 2.0 * tail if stalled else 0.0)
                keep = np.nonzero(np.max(np.abs(c.reshape(-1, n)), axis=0) > floor)[0]
                last = int(keep[-1]) + 1 if keep.size else 1
                return cls(c[..., :last], lo, hi)
            if n >= quad.n_max:
                raise QuadratureError(f"cosine series did not converge on [{lo}, {hi}]", c, tail)
            prev_tail = tail
            n *= 2

    @property
    def total(self):
        """int_0^pi F(t) dt."""
        return self.coef[..., 0] * math.pi

    def theta(self, x):
        return theta_of(x, self.lo, self.hi)

    def cumulative(self, t):
        """int_0^t F(s) ds for an array of angles t; result shape (..., len(t))."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        M = self.coef.shape[-1]
        k = np.arange(1, M)
        S = np.sin(np.outer(t, k)) / k
        return self.coef[..., :1] * t + self.coef[..., 1:] @ S.T

    def value(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        C = np.cos(np.outer(t, np.arange(self.coef.shape[-1])))
        return self.coef @ C.T

    def cauchy(self, z):
        """int_0^pi F(s) / (z - x(s)) ds for complex z off the interval (closed form per mode).

        Uses int_0^pi cos(m s) / (zeta - cos s) ds = pi r^m / sqrt(zeta^2 - 1) with
        zeta = (z - m) / w and r = zeta - sqrt(zeta^2 - 1), |r| < 1.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        m, w = 0.5 * (self.lo + self.hi), 0.5 * (self.hi - self.lo)
        zeta = (z - m) / w
        root = np.sqrt(zeta - 1.0) * np.sqrt(zeta + 1.0)
        r = zeta - root
        coef = self.coef.reshape(-1, self.coef.shape[-1])
        acc = np.zeros((coef.shape[0], z.size), dtype=complex)
        for j in range(coef.shape[1] - 1, -1, -1):
            acc = acc * r[None, :] + coef[:, j:j + 1]
        out = math.pi * acc / (w * root[None, :])
        return out.reshape(self.coef.shape[:-1] + (z.size,))

    def glauert(self, t):
        """PV int_0^pi F(s) / (cos s - cos t) ds."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        u = np.cos(t)
        M = self.coef.shape[-1]
        U = np.empty((M - 1, t.size)) if M > 1 else np.empty((0, t.size))
        if M > 1:
            U[0] = 1.0
        if M > 2:
            U[1] = 2.0 * u
        for j in range(2, M - 1):
            U[j] = 2.0 * u * U[j - 1] - U[j - 2]
        return math.pi * (self.coef[..., 1:] @ U)
