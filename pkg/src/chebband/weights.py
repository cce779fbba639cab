"""Positive weights on E.

Weights enter the extremal problem as divisors: the minimal polynomial minimizes
||M / W|| on E.  Three kinds are supported: the unit weight, polynomials
rho(x) = +-prod (x - w_j)^nu_j that are positive on E, and sampled weights
interpolated band by band.  :class:`FunctionWeight` wraps any positive callable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import BarycentricInterpolator

from .domain import IntervalSystem


class WeightError(ValueError):
    """A weight is not positive on E or is malformed."""


class Weight:
    """Base class: a positive function on E, optionally with an analytic continuation."""

    kind = "function"

    def __call__(self, x) -> np.ndarray:
        raise NotImplementedError

    def log(self, x) -> np.ndarray:
        return np.log(self(x))

    @property
    def analytic(self) -> Callable | None:
        """Holomorphic continuation of W off E, or None when only samples are known."""
        return None

    def check_positive(self, sys: IntervalSystem, n: int = 2000) -> None:
        for lo, hi in sys.bands:
            x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(np.linspace(0, math.pi, n))
            v = self(x)
            if not np.all(np.isfinite(v)) or np.any(v <= 0):
                raise WeightError(f"weight is not positive on [{lo}, {hi}]")

    def to_json(self) -> dict:
        raise WeightError("this weight has no JSON form")


class UnitWeight(Weight):
    kind = "unit"

    def __call__(self, x):
        return np.ones(np.shape(x))

    def log(self, x):
        return np.zeros(np.shape(x))

    @property
    def analytic(self):
        return lambda z: np.ones(np.shape(z), dtype=complex)

    def to_json(self):
        return {"type": "unit"}


@dataclass
class FunctionWeight(Weight):
    """A positive callable; ``holomorphic`` gives its continuation when one exists."""

    fn: Callable[[np.ndarray], np.ndarray]
    holomorphic: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "function"

    def __call__(self, x):
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)

    @property
    def analytic(self):
        return self.holomorphic


@dataclass
class PolynomialWeight(Weight):
    """rho(x) = sign * scale * prod_j (x - w_j)^nu_j, positive on E.

    Non-real roots must come in conjugate pairs with equal multiplicities.
    """

    roots: Sequence[complex]
    mults: Sequence[int]
    sign: float = 1.0
    scale: float = 1.0
    kind: str = field(default="poly", init=False)

    def __post_init__(self):
        self.roots = [complex(r) for r in self.roots]
        self.mults = [int(m) for m in self.mults]
        if len(self.roots) != len(self.mults):
            raise WeightError("roots and multiplicities differ in length")
        if any(m < 1 for m in self.mults):
            raise WeightError("multiplicities must be positive")
        if self.sign not in (1.0, -1.0, 1, -1):
            raise WeightError("sign must be +1 or -1")
        self.sign = float(self.sign)
        self.scale = float(self.scale)
        if not self.scale > 0:
            raise WeightError("scale must be positive")
        for r, m in zip(self.roots, self.mults):
            if r.imag != 0.0:
                partners = [m2 for r2, m2 in zip(self.roots, self.mults)
                            if abs(r2 - r.conjugate()) <= 1e-14 * max(1.0, abs(r))]
                if not partners or partners[0] != m:
                    raise WeightError(f"root {r} lacks a conjugate partner of equal multiplicity")

    @property
    def degree(self) -> int:
        return int(sum(self.mults))

    @property
    def real_roots(self) -> list[tuple[float, int]]:
        return [(r.real, m) for r, m in zip(self.roots, self.mults) if r.imag == 0.0]

    @property
    def upper_roots(self) -> list[tuple[complex, int]]:
        """Non-real roots in the upper half plane (one per conjugate pair)."""
        return [(r, m) for r, m in zip(self.roots, self.mults) if r.imag > 0.0]

    def _eval(self, z):
        out = np.full(np.shape(z), self.sign * self.scale, dtype=np.result_type(z, complex))
        for r, m in zip(self.roots, self.mults):
            out = out * (z - r) ** m
        return out

    def __call__(self, x):
        return self._eval(np.asarray(x, dtype=float)).real

    @property
    def analytic(self):
        return lambda z: self._eval(np.asarray(z, dtype=complex))

    def polynomial(self) -> Polynomial:
        coef = np.array([self.sign * self.scale], dtype=complex)
        for r, m in zip(self.roots, self.mults):
            for _ in range(m):
                coef = np.polynomial.polynomial.polymul(coef, [-r, 1.0])
        return Polynomial(coef.real)

    @classmethod
    def from_polynomial(cls, p: Polynomial, imag_tol: float = 1e-10) -> "PolynomialWeight":
        """Factor a real polynomial (power basis in x) into roots, sign and scale."""
        p = p.trim()
        lead = float(p.coef[-1])
        roots: list[complex] = []
        mults: list[int] = []
        for r in p.roots():
            if abs(r.imag) <= imag_tol * max(1.0, abs(r)):
                roots.append(complex(r.real, 0.0))
                mults.append(1)
            elif r.imag > 0:
                roots += [complex(r), complex(r).conjugate()]
                mults += [1, 1]
        return cls(roots, mults, 1.0 if lead > 0 else -1.0, abs(lead))

    def check_positive(self, sys: IntervalSystem, n: int = 2000) -> None:
        for r in self.roots:
            if r.imag == 0.0 and sys.band_of(r.real) >= 0:
                raise WeightError(f"root {r.real} lies on E")
        super().check_positive(sys, n)

    def to_json(self):
        return {
            "type": "poly",
            "roots": [{"re": r.real, "im": r.imag, "mult": m} for r, m in zip(self.roots, self.mults)],
            "sign": self.sign,
            "scale": self.scale,
        }


class SampledWeight(Weight):
    """Samples on E interpolated by a barycentric polynomial on each band."""

    kind = "sampled"

    def __init__(self, sys: IntervalSystem, grid: Sequence[float], values: Sequence[float]):
        g = np.asarray(grid, dtype=float)
        v = np.asarray(values, dtype=float)
        if g.shape != v.shape or g.ndim != 1:
            raise WeightError("grid and values must be 1-d of equal length")
        if np.any(v <= 0):
            raise WeightError("sampled weight must be positive")
        self.sys = sys
        self.grid, self.values = g, v
        self._interp = []
        for lo, hi in sys.bands:
            sel = (g >= lo) & (g <= hi)
            if sel.sum() < 2:
                raise WeightError(f"band [{lo}, {hi}] needs at least two samples")
            self._interp.append(BarycentricInterpolator(g[sel], np.log(v[sel])))

    def log(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, np.nan)
        for (lo, hi), f in zip(self.sys.bands, self._interp):
            sel = (x >= lo) & (x <= hi)
            if np.any(sel):
                out[sel] = f(x[sel])
        return out

    def __call__(self, x):
        return np.exp(self.log(x))

    def to_json(self):
        return {"type": "sampled", "grid": self.grid.tolist(), "values": self.values.tolist()}


def weight_from_json(data: dict, sys: IntervalSystem) -> Weight:
    """Parse the JSON weight forms {"type": "unit" | "poly" | "sampled", ...}."""
    kind = data.get("type")
    if kind == "unit":
        return UnitWeight()
    if kind == "poly":
        roots = [complex(r["re"], r.get("im", 0.0)) for r in data.get("roots", [])]
        mults = [int(r.get("mult", 1)) for r in data.get("roots", [])]
        w = PolynomialWeight(roots, mults, float(data.get("sign", 1.0)), float(data.get("scale", 1.0)))
        w.check_positive(sys)
        return w
    if kind == "sampled":
        w = SampledWeight(sys, data["grid"], data["values"])
        return w
    raise WeightError(f"unknown weight type {kind!r}")
