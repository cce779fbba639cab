"""Interval systems E = E_1 u ... u E_l and the algebraic functions attached to them.

The polynomial H(x) = prod_j (x - a_j) vanishes at the 2l endpoints.  Its square
root is taken on the sheet where sqrt(H(x)) > 0 for x > a_{2l}; on the real axis
the upper-half-plane limit is returned.  With this branch

* on gap j (between bands j and j+1):  sqrt(H+) = (-1)^(l-j) |H|^(1/2)
* on band k:                           sqrt(H+) = i (-1)^(l-k) |H|^(1/2)

and the signed density 1/h = (-1)^(l-k) / (pi |H|^(1/2)) satisfies
r / sqrt(H+) = -i pi r / h on E.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

#: Value returned by :func:`eval_h_inv` at a band endpoint.  The density is not
#: integrable pointwise there; integrals must go through the singular quadrature.
ENDPOINT_MARKER = float("nan")


class InvalidSystem(ValueError):
    """Raised for malformed interval systems."""


@dataclass(frozen=True)
class IntervalSystem:
    """A finite union of disjoint closed intervals with strictly increasing endpoints."""

    endpoints: tuple[float, ...]

    @property
    def l(self) -> int:
        return len(self.endpoints) // 2

    @property
    def a(self) -> np.ndarray:
        return np.asarray(self.endpoints, dtype=float)

    @property
    def bands(self) -> list[tuple[float, float]]:
        e = self.endpoints
        return [(e[2 * k], e[2 * k + 1]) for k in range(self.l)]

    @property
    def gaps(self) -> list[tuple[float, float]]:
        e = self.endpoints
        return [(e[2 * j + 1], e[2 * j + 2]) for j in range(self.l - 1)]

    @property
    def hull(self) -> tuple[float, float]:
        return self.endpoints[0], self.endpoints[-1]

    @property
    def diam(self) -> float:
        return self.endpoints[-1] - self.endpoints[0]

    def band_of(self, x: float) -> int:
        """Zero-based index of the closed band containing ``x``, or -1."""
        for k, (lo, hi) in enumerate(self.bands):
            if lo <= x <= hi:
                return k
        return -1

    def gap_of(self, x: float) -> int:
        """Zero-based index of the open gap containing ``x``, or -1."""
        for j, (lo, hi) in enumerate(self.gaps):
            if lo < x < hi:
                return j
        return -1

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for lo, hi in self.bands:
            out |= (x >= lo) & (x <= hi)
        return out

    def affine(self, s: float, t: float) -> "IntervalSystem":
        """Image under x -> s x + t with s > 0."""
        if s <= 0:
            raise ValueError("scale must be positive")
        return validate_system([s * v + t for v in self.endpoints])

    def to_json(self) -> dict:
        return {"endpoints": [float(v) for v in self.endpoints]}


@dataclass(frozen=True)
class ComplexPoint:
    re: float
    im: float = 0.0

    def __complex__(self) -> complex:
        return complex(self.re, self.im)


def validate_system(endpoints: Sequence[float]) -> IntervalSystem:
    """Check and freeze a sequence of endpoints a_1 < ... < a_{2l}."""
    pts = [float(v) for v in endpoints]
    if len(pts) < 2:
        raise InvalidSystem("an interval system needs at least two endpoints")
    if len(pts) % 2:
        raise InvalidSystem(f"odd number of endpoints ({len(pts)})")
    if not all(math.isfinite(v) for v in pts):
        raise InvalidSystem("endpoints must be finite")
    if any(b <= a for a, b in zip(pts, pts[1:])):
        raise InvalidSystem("endpoints must be strictly increasing")
    return IntervalSystem(tuple(pts))


def _as_upper(z) -> np.ndarray:
    """Complex array with real inputs placed on the upper bank (imag = +0.0)."""
    z = np.asarray(z)
    if np.iscomplexobj(z):
        im = np.where(z.imag == 0, 0.0, z.imag)
        return z.real + 1j * im
    return z.astype(float) + 0j


def eval_H(sys: IntervalSystem, z):
    """H(z) = prod_j (z - a_j); real input gives real output."""
    z = np.asarray(z)
    out = np.ones(z.shape, dtype=np.result_type(z, float))
    for a in sys.endpoints:
        out = out * (z - a)
    return out[()] if out.ndim == 0 else out


def sqrtH_plus(sys: IntervalSystem, z):
    """Branch of sqrt(H(z)) positive right of a_{2l}; upper limit on the real axis.

    Computed as a product of principal square roots sqrt(z - a_j), so no branch
    flips occur across gaps.
    """
    zc = _as_upper(z)
    out = np.ones(zc.shape, dtype=complex)
    for a in sys.endpoints:
        out = out * np.sqrt(zc - a)
    return out[()] if out.ndim == 0 else out


def abs_rest(sys: IntervalSystem, x, skip: tuple[int, ...]) -> np.ndarray:
    """|prod_{j not in skip} (x - a_j)| for real x (skip holds 0-based endpoint indices)."""
    x = np.asarray(x, dtype=float)
    out = np.ones(x.shape)
    for i, a in enumerate(sys.endpoints):
        if i not in skip:
            out = out * np.abs(x - a)
    return out


def band_sign(sys: IntervalSystem, k: int) -> int:
    """(-1)^(l-k) for the 0-based band index k (band number k+1)."""
    return -1 if (sys.l - (k + 1)) % 2 else 1


def gap_sign(sys: IntervalSystem, j: int) -> int:
    """Sign of sqrt(H+) on the 0-based gap j (between bands j+1 and j+2)."""
    return -1 if (sys.l - (j + 1)) % 2 else 1


def eval_h_inv(sys: IntervalSystem, x):
    """Signed equilibrium-type density 1/h(x) = (-1)^(l-k) / (pi sqrt(-H(x))) on band k.

    Zero off E, :data:`ENDPOINT_MARKER` at the endpoints.
    """
    xa = np.asarray(x, dtype=float)
    out = np.zeros(xa.shape)
    H = eval_H(sys, xa)
    for k, (lo, hi) in enumerate(sys.bands):
        inside = (xa > lo) & (xa < hi)
        with np.errstate(invalid="ignore", divide="ignore"):
            val = band_sign(sys, k) / (math.pi * np.sqrt(np.abs(H)))
        out = np.where(inside, val, out)
    ends = np.isin(xa, sys.a)
    out = np.where(ends, ENDPOINT_MARKER, out)
    return out[()] if out.ndim == 0 else out
