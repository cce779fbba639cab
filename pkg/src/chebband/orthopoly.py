"""Orthonormal polynomials on a union of intervals.

Measures are given band by band with Jacobi-type end behaviour, so Gauss-Jacobi
nodes integrate polynomials against them to machine precision.  The recurrence
coefficients come from a Lanczos process with full reorthogonalization on those
nodes.  Orthonormal polynomials stay of moderate size on E at every degree, which
makes them a well-conditioned basis where monomials or hull Chebyshev polynomials
grow like exp(n g(x)) in the gaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.special import roots_jacobi

from .domain import IntervalSystem, eval_H


class OrthogonalityError(RuntimeError):
    """Loss of orthogonality in the Lanczos recurrence."""


@dataclass
class BandMeasure:
    """density(x) dx on E with density ~ (x - lo)^alpha (hi - x)^beta on each band."""

    system: IntervalSystem
    density: Callable[[np.ndarray], np.ndarray]
    exponents: Sequence[tuple[float, float]]

    def nodes(self, per_band: int) -> tuple[np.ndarray, np.ndarray]:
        """Gauss-Jacobi nodes and weights for the whole of E."""
        xs, ws = [], []
        for (lo, hi), (al, be) in zip(self.system.bands, self.exponents):
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
            t, w = roots_jacobi(per_band, be, al)  # weight (1 - t)^be (1 + t)^al
            x = mid + half * t
            smooth = self.density(x) / ((x - lo) ** al * (hi - x) ** be)
            xs.append(x)
            ws.append(w * half ** (1.0 + al + be) * smooth)
        return np.concatenate(xs), np.concatenate(ws)


@dataclass
class OrthonormalSystem:
    """p_{k+1}(t) b_{k+1} = (t - a_k) p_k(t) - b_k p_{k-1}(t) in the hull variable t.

    The measure is the one in x; only the variable is rescaled, so P_k(x) = p_k(t(x))
    are orthonormal in x with leading coefficient half^-k / (sqrt(mu0) b_1 ... b_k).
    """

    a: np.ndarray
    b: np.ndarray  # b[0] unused, b[k] for k >= 1
    mu0: float
    mid: float
    half: float
    gram_residual: float = 0.0

    @property
    def n(self) -> int:
        return self.a.size - 1

    def t(self, x):
        return (np.asarray(x) - self.mid) / self.half

    def eval_all(self, x, k: int | None = None) -> np.ndarray:
        """P_0..P_k at x, shape (k+1, len(x))."""
        k = self.n if k is None else k
        t = np.atleast_1d(self.t(x))
        out = np.zeros((k + 1,) + t.shape, dtype=np.result_type(t, float))
        out[0] = 1.0 / math.sqrt(self.mu0)
        if k >= 1:
            out[1] = (t - self.a[0]) * out[0] / self.b[1]
        for j in range(1, k):
            out[j + 1] = ((t - self.a[j]) * out[j] - self.b[j] * out[j - 1]) / self.b[j + 1]
        return out

    def __call__(self, x, k: int):
        return self.eval_all(x, k)[k]

    def cheb(self, k: int) -> np.ndarray:
        """Chebyshev coefficients (in t) of P_k."""
        p_prev = np.zeros(1)
        p = np.array([1.0 / math.sqrt(self.mu0)])
        for j in range(k):
            nxt = C.chebsub(C.chebmulx(p), self.a[j] * p)
            if j > 0:
                nxt = C.chebsub(nxt, self.b[j] * p_prev)
            p_prev, p = p, nxt / self.b[j + 1]
        return p

    def squared_deviation(self, k: int) -> float:
        """E_{k-1,2}(x^k; measure) = 1 / lc(P_k)^2."""
        return self.mu0 * float(np.prod(self.b[1: k + 1] ** 2)) * self.half ** (2 * k)


def lanczos(x: np.ndarray, w: np.ndarray, n: int, mid: float, half: float) -> OrthonormalSystem:
    """Recurrence coefficients of the discrete measure sum w_i delta_{x_i} up to degree n."""
    if np.any(w <= 0):
        raise OrthogonalityError("quadrature weights must be positive")
    t = (x - mid) / half
    mu0 = float(np.sum(w))
    Q = np.zeros((t.size, n + 1))
    q = np.sqrt(w / mu0)
    Q[:, 0] = q
    a = np.zeros(n + 1)
    b = np.zeros(n + 1)
    for k in range(n + 1):
        v = t * Q[:, k]
        a[k] = Q[:, k] @ v
        if k == n:
            break
        v -= a[k] * Q[:, k]
        if k > 0:
            v -= b[k] * Q[:, k - 1]
        for _ in range(2):
            v -= Q[:, : k + 1] @ (Q[:, : k + 1].T @ v)
        b[k + 1] = float(np.linalg.norm(v))
        if b[k + 1] <= 1e-14:
            raise OrthogonalityError(f"recurrence broke down at degree {k + 1}")
        Q[:, k + 1] = v / b[k + 1]
    gram = float(np.max(np.abs(Q.T @ Q - np.eye(n + 1))))
    return OrthonormalSystem(a, b, mu0, mid, half, gram)


def equilibrium_measure(system: IntervalSystem) -> BandMeasure:
    """dx / sqrt|H(x)| on E, the equilibrium measure up to normalization."""

    def density(x):
        return 1.0 / np.sqrt(np.abs(eval_H(system, x).real))

    return BandMeasure(system, density, [(-0.5, -0.5)] * system.l)


def orthonormal_basis(measure: BandMeasure, n: int, per_band: int | None = None) -> OrthonormalSystem:
    """P_0..P_n for ``measure`` with the hull variable of its system."""
    per_band = max(2 * n + 60, 120) if per_band is None else per_band
    x, wt = measure.nodes(per_band)
    lo, hi = measure.system.hull
    return lanczos(x, wt, n, 0.5 * (lo + hi), 0.5 * (hi - lo))
