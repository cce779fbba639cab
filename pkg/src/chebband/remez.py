"""Weighted minimax polynomials on a union of intervals by Remez exchange.

The work happens in the hull variable t in [-1, 1].  The monic problem
min ||M(x) / W(x)|| over monic M of degree n becomes best approximation of a
fixed monic polynomial in t by polynomials of degree
n-1, with the deviation scaled back by (half-width)^n.  A reference of m+2
alternation points is exchanged for the extrema of the current error until the
levels agree; the smallest level on the reference is a de la Vallee Poussin
lower bound.

Polynomials are represented in the orthonormal basis of dx / sqrt|H| on E.  Hull
Chebyshev polynomials grow like exp(n g(x)) in the gaps, so the Chebyshev
coefficients of a minimal polynomial cancel to many digits on E; the orthonormal
basis stays of moderate size there at every degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.optimize import minimize_scalar

from .domain import IntervalSystem
from .orthopoly import OrthonormalSystem, equilibrium_measure, orthonormal_basis
from .weights import UnitWeight, Weight


class RemezError(RuntimeError):
    """The exchange did not produce a valid alternation set."""


@dataclass
class MinimaxCore:
    """Best approximation of f by degree-m polynomials in the weighted norm ||(f - q) / w||."""

    coef: np.ndarray  # coefficients of q in the basis
    level: float  # max |(f - q) / w| on the grid at exit
    ref: np.ndarray  # reference points (t)
    ref_err: np.ndarray  # signed errors on the reference
    iterations: int
    converged: bool


def _band_grid(bands_t: list[tuple[float, float]], per_band: int) -> list[np.ndarray]:
    out = []
    for lo, hi in bands_t:
        k = np.arange(per_band)
        out.append(0.5 * (lo + hi) - 0.5 * (hi - lo) * np.cos(math.pi * k / (per_band - 1)))
    return out


def _extrema(err: Callable[[np.ndarray], np.ndarray], grids: list[np.ndarray]):
    """Signed local extrema of err on each band, refined by bounded Brent/golden search."""
    pts, vals = [], []
    for g in grids:
        e = err(g)
        n = g.size
        for i in range(n):
            s = 1.0 if e[i] >= 0 else -1.0
            left = s * e[i - 1] if i > 0 else -math.inf
            right = s * e[i + 1] if i < n - 1 else -math.inf
            if s * e[i] >= left and s * e[i] >= right and not (s * e[i] == left and i > 0):
                if 0 < i < n - 1:
                    res = minimize_scalar(lambda t: -s * err(np.array([t]))[0],
                                          bounds=(g[i - 1], g[i + 1]), method="bounded",
                                          options={"xatol": 1e-15 * max(1.0, abs(g[i]))})
                    t_best = res.x if -res.fun >= s * e[i] else g[i]
                    pts.append(t_best)
                    vals.append(float(err(np.array([t_best]))[0]))
                else:
                    pts.append(g[i])
                    vals.append(e[i])
    order = np.argsort(pts)
    return np.asarray(pts)[order], np.asarray(vals)[order]


def _alternating_subset(t: np.ndarray, e: np.ndarray, size: int):
    """Reduce candidate extrema to an alternating set of exactly ``size`` points, or None."""
    pts = list(zip(t.tolist(), e.tolist()))
    merged: list[tuple[float, float]] = []
    for p in pts:
        if merged and np.sign(merged[-1][1]) == np.sign(p[1]):
            if abs(p[1]) > abs(merged[-1][1]):
                merged[-1] = p
        else:
            merged.append(p)
    while len(merged) > size:
        if len(merged) == size + 1:
            if abs(merged[0][1]) < abs(merged[-1][1]):
                merged.pop(0)
            else:
                merged.pop()
            continue
        i = int(np.argmin([abs(v) for _, v in merged]))
        if i == 0 or i == len(merged) - 1:
            merged.pop(i)
            continue
        # dropping an interior point leaves its equal-signed neighbours adjacent
        merged.pop(i)
        a, b = merged[i - 1], merged[i]
        merged[i - 1:i + 1] = [a if abs(a[1]) >= abs(b[1]) else b]
    if len(merged) < size:
        return None
    return np.array([p[0] for p in merged]), np.array([p[1] for p in merged])


def _single_exchange(ref: np.ndarray, ref_err: np.ndarray, t_new: float, e_new: float):
    """Classical one-point exchange keeping sign alternation."""
    ref = ref.copy()
    ref_err = ref_err.copy()
    s = np.sign(e_new)
    i = int(np.searchsorted(ref, t_new))
    if i == 0:
        if np.sign(ref_err[0]) == s:
            ref[0], ref_err[0] = t_new, e_new
        else:
            ref = np.concatenate([[t_new], ref[:-1]])
            ref_err = np.concatenate([[e_new], ref_err[:-1]])
    elif i == ref.size:
        if np.sign(ref_err[-1]) == s:
            ref[-1], ref_err[-1] = t_new, e_new
        else:
            ref = np.concatenate([ref[1:], [t_new]])
            ref_err = np.concatenate([ref_err[1:], [e_new]])
    else:
        j = i - 1 if np.sign(ref_err[i - 1]) == s else i
        ref[j], ref_err[j] = t_new, e_new
    return ref, ref_err


def minimax_core(f: Callable[[np.ndarray], np.ndarray], w: Callable[[np.ndarray], np.ndarray],
                 m: int, bands_t: list[tuple[float, float]], ref0: np.ndarray,
                 tol: float = 1e-10, per_band: int = 200, max_iter: int = 80,
                 basis: Callable[[np.ndarray, int], np.ndarray] | None = None) -> MinimaxCore:
    """Remez exchange for min_q max_{E_t} |(f - q) / w| over q of degree m (t-space).

    ``basis(t, m)`` returns the (len(t), m + 1) matrix of basis polynomials at t;
    the default is the Chebyshev basis.
    """
    vander = C.chebvander if basis is None else basis
    grids = _band_grid(bands_t, per_band)
    ref = np.sort(np.asarray(ref0, dtype=float))
    size = m + 2
    if ref.size != size:
        raise RemezError(f"reference needs {size} points, got {ref.size}")
    signs = (-1.0) ** np.arange(size)
    best: MinimaxCore | None = None
    coef = np.zeros(m + 1)
    for it in range(1, max_iter + 1):
        V = vander(ref, m)
        A = np.hstack([V, (signs * w(ref))[:, None]])
        try:
            sol = np.linalg.solve(A, f(ref))
        except np.linalg.LinAlgError as exc:
            raise RemezError("singular reference system") from exc
        coef = sol[:-1]

        def err(t, coef=coef):
            return (f(t) - vander(np.atleast_1d(t), m) @ coef) / w(t)

        pts, vals = _extrema(err, grids)
        gmax = float(np.max(np.abs(vals)))
        sub = _alternating_subset(pts, vals, size)
        if sub is None:
            k = int(np.argmax(np.abs(vals)))
            new_ref, new_err = _single_exchange(ref, err(ref), pts[k], vals[k])
        else:
            new_ref, new_err = sub
        lv = np.abs(new_err)
        spread = (gmax - float(np.min(lv))) / gmax if gmax > 0 else 0.0
        cur = MinimaxCore(coef, gmax, new_ref, new_err, it, spread <= tol)
        if best is None or cur.level < best.level:
            best = cur
        if spread <= tol:
            # new reference is alternating with levels within tol of the grid maximum
            return cur
        ref = np.sort(new_ref)
        if np.unique(ref).size < size:
            break
    assert best is not None
    best.converged = False
    return best


# ---------------------------------------------------------------------------


@dataclass
class RemezResult:
    """Monic weighted minimax polynomial M(x) = scale * sum_k cheb[k] T_k(t).

    When ``basis`` is set, M(x) = scale * sum_k coef[k] P_k(t) is the primary
    representation and ``cheb`` its (less accurate in the gaps) conversion.
    """

    n: int
    system: IntervalSystem
    cheb: np.ndarray
    scale: float
    deviation: float
    vp_lower: float
    alternation: np.ndarray
    signs: np.ndarray
    iterations: int
    converged: bool
    zeros: np.ndarray = field(default_factory=lambda: np.zeros(0))
    zeros_per_band: list[int] = field(default_factory=list)
    gap_zeros: list[list[float]] = field(default_factory=list)
    basis: OrthonormalSystem | None = field(default=None, repr=False)
    coef: np.ndarray | None = field(default=None, repr=False)

    def t_of(self, x):
        lo, hi = self.system.hull
        return (np.asarray(x, dtype=float) - 0.5 * (lo + hi)) / (0.5 * (hi - lo))

    def __call__(self, x):
        t = self.t_of(x)
        if self.basis is None:
            return self.scale * C.chebval(t, self.cheb)
        vals = self.coef @ self.basis.eval_all(np.atleast_1d(t))
        return self.scale * (vals if np.ndim(t) else vals[0])

    def normalized(self, x):
        """M_n(x) = M(x) / deviation."""
        return self(x) / self.deviation

    def power_coeffs(self) -> np.ndarray:
        """Coefficients of M in powers of x, lowest first (leading coefficient 1)."""
        lo, hi = self.system.hull
        p = np.polynomial.Chebyshev(self.cheb * self.scale, domain=[lo, hi])
        return p.convert(kind=np.polynomial.Polynomial, domain=[-1, 1], window=[-1, 1]).coef

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "endpoints": list(self.system.endpoints),
            "cheb_hull": self.cheb.tolist(),
            "scale": self.scale,
            "deviation": self.deviation,
            "vp_lower": self.vp_lower,
            "alternation": self.alternation.tolist(),
            "signs": self.signs.astype(int).tolist(),
            "iterations": self.iterations,
            "converged": self.converged,
            "zeros_per_band": list(self.zeros_per_band),
            "gap_zeros": [list(g) for g in self.gap_zeros],
        }


def _initial_reference(bands_t, weights_k, size):
    raw = np.asarray(weights_k, dtype=float) * size
    counts = np.floor(raw).astype(int)
    for i in np.argsort(-(raw - counts))[: size - counts.sum()]:
        counts[i] += 1
    pts = []
    for (lo, hi), c in zip(bands_t, counts):
        if c == 1:
            pts.append(np.array([0.5 * (lo + hi)]))
        elif c > 1:
            k = np.arange(c)
            pts.append(0.5 * (lo + hi) - 0.5 * (hi - lo) * np.cos(math.pi * k / (c - 1)))
    return np.sort(np.concatenate(pts))


def _hull_bands(sys: IntervalSystem):
    lo, hi = sys.hull
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return mid, half, [((a - mid) / half, (b - mid) / half) for a, b in sys.bands]


def _band_share(sys: IntervalSystem, omega: np.ndarray | None):
    if omega is not None:
        return np.asarray(omega, dtype=float)
    from .potential import build_table

    return np.asarray(build_table(sys).omega_inf)


def minimax_monic(sys: IntervalSystem, W: Weight | None, n: int, tol: float = 1e-10,
                  grid_factor: int = 30, omega: np.ndarray | None = None,
                  max_iter: int = 80) -> RemezResult:
    """Monic M of degree n minimizing ||M / W|| on E, with alternation certificate and zeros."""
    if n < 1:
        raise ValueError("degree must be at least 1")
    W = UnitWeight() if W is None else W
    mid, half, bands_t = _hull_bands(sys)
    share = _band_share(sys, omega)
    ref0 = _initial_reference(bands_t, share, n + 1)
    sys_t = IntervalSystem(tuple(v for band in bands_t for v in band))
    ons = orthonormal_basis(equilibrium_measure(sys_t), n)
    # P_n rescaled to be monic in t
    lead = math.sqrt(ons.mu0) * float(np.prod(ons.b[1: n + 1]))

    def vander(t, m):
        return ons.eval_all(t, m).T

    def f(t):
        return lead * ons.eval_all(t, n)[n]

    def w(t):
        return W(mid + half * t)

    core = minimax_core(f, w, n - 1, bands_t, ref0, tol=tol,
                        per_band=max(200, grid_factor * n), max_iter=max_iter, basis=vander)
    coef = np.zeros(n + 1)
    coef[n] = lead
    coef[:n] -= core.coef
    cheb = sum(c * np.pad(ons.cheb(k), (0, n - k)) for k, c in enumerate(coef))
    scale = half ** n
    res = RemezResult(
        n=n, system=sys, cheb=cheb, scale=scale,
        deviation=core.level * scale,
        vp_lower=float(np.min(np.abs(core.ref_err))) * scale,
        alternation=mid + half * core.ref,
        signs=np.sign(core.ref_err),
        iterations=core.iterations, converged=core.converged,
        basis=ons, coef=coef,
    )
    analyze_zeros(res)
    return res


def analyze_zeros(res: RemezResult) -> tuple[list[int], list[list[float]]]:
    """Real zeros of the minimal polynomial, counted per band and listed per gap."""
    sys = res.system
    lo, hi = sys.hull
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    roots = C.chebroots(res.cheb)
    real = roots[np.abs(roots.imag) <= 1e-7 * np.maximum(1.0, np.abs(roots))].real
    deriv = C.chebder(res.cheb)
    refined = []
    for r in real:
        for _ in range(6):
            d = C.chebval(r, deriv)
            if d == 0:
                break
            step = C.chebval(r, res.cheb) / d
            r -= step
            if abs(step) < 1e-16:
                break
        refined.append(r)
    x = np.sort(mid + half * np.asarray(refined, dtype=float))
    x = x[(x >= lo - 1e-9 * half) & (x <= hi + 1e-9 * half)]
    slack = 1e-10 * sys.diam
    per_band = [int(np.sum((x >= a - slack) & (x <= b + slack))) for a, b in sys.bands]
    gaps = []
    for L, R in sys.gaps:
        gaps.append([float(v) for v in x[(x > L + slack) & (x < R - slack)]])
    res.zeros = x
    res.zeros_per_band = per_band
    res.gap_zeros = gaps
    return per_band, gaps
