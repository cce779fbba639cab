"""Orthonormal polynomials for edge-class weights and the L-infinity / L2 bridge.

An edge-class weight on E is R(x) / (W(x) h(x)) where R is monic of degree l-1
and vanishes at exactly one endpoint of each gap (optionally multiplied by
a_{2l} - x), and 1/h = (-1)^(l-k) / (pi sqrt|H|) on band k.  Near a band end the
weight behaves like |x - a|^(+1/2) when R vanishes there and |x - a|^(-1/2)
otherwise, so Gauss-Jacobi nodes per band integrate it to machine precision.

The bridge compares the sup-norm deviation of degree 2n (or 2n + 1) with the
largest L2 deviation E_{n-1,2}(x^n; R/(W h)) over the 2^(l-1) choices of R.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import chebyshev as C

from .domain import IntervalSystem, eval_H, gap_sign
from .orthopoly import BandMeasure, OrthogonalityError, OrthonormalSystem, lanczos
from .potential import build_table
from .remez import minimax_monic
from .inversion import solve_for_n
from .weights import PolynomialWeight, UnitWeight, Weight


@dataclass
class EdgeClassWeight:
    """R_eps / (W h) with eps_j = -1 when R vanishes at the left end of gap j, +1 at the right end.

    ``augmented`` multiplies R by (a_{2l} - x).
    """

    system: IntervalSystem
    eps: tuple[int, ...]
    weight: Weight = field(default_factory=UnitWeight)
    augmented: bool = False

    def __post_init__(self):
        self.eps = tuple(int(e) for e in self.eps)
        if len(self.eps) != self.system.l - 1 or any(e not in (-1, 1) for e in self.eps):
            raise ValueError(f"need {self.system.l - 1} signs in {{-1, +1}}, got {self.eps}")

    @property
    def roots(self) -> np.ndarray:
        ends = self.system.endpoints
        r = [ends[2 * j + 1] if e == -1 else ends[2 * j + 2] for j, e in enumerate(self.eps)]
        if self.augmented:
            r.append(ends[-1])
        return np.array(r, dtype=float)

    @property
    def R(self) -> Polynomial:
        p = Polynomial.fromroots(self.roots[: self.system.l - 1]) if self.system.l > 1 else Polynomial([1.0])
        if self.augmented:
            p = p * Polynomial([self.system.endpoints[-1], -1.0])
        return p

    def zeros_per_band(self) -> list[int]:
        r = self.roots
        return [int(np.sum((r >= lo) & (r <= hi))) for lo, hi in self.system.bands]

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        H = np.abs(eval_H(self.system, x).real)
        return np.abs(self.R(x)) / (math.pi * np.sqrt(H)) / self.weight(x)

    def check_positive(self, n: int = 400) -> None:
        """R / h > 0 on int(E) with the band signs of h."""
        sys = self.system
        for k, (lo, hi) in enumerate(sys.bands):
            x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(np.linspace(0.01, math.pi - 0.01, n))
            s = (-1) ** (sys.l - 1 - k)
            if np.any(s * self.R(x) <= 0):
                raise ValueError(f"R / h changes sign on band {k}")

    def measure(self) -> BandMeasure:
        sys = self.system
        r = self.roots
        tol = 1e-14 * max(1.0, sys.diam)
        ex = []
        for lo, hi in sys.bands:
            al = 0.5 if np.any(np.abs(r - lo) <= tol) else -0.5
            be = 0.5 if np.any(np.abs(r - hi) <= tol) else -0.5
            ex.append((al, be))
        return BandMeasure(sys, self, ex)


def all_eps(l: int):
    return list(itertools.product((-1, 1), repeat=l - 1))


def eps_for_sigma(sigma: Sequence[int]) -> tuple[int, ...]:
    """The unique R with #zeros on band j (j = 0..l-2) congruent to sigma_j modulo 2.

    Band j holds the root of gap j when it sits at the left gap end (eps = -1) and the
    root of gap j-1 when that sits at the right gap end (eps = +1).
    """
    eps: list[int] = []
    prev_right = 0
    for s in sigma:
        left = (int(s) - prev_right) % 2
        eps.append(-1 if left else 1)
        prev_right = 0 if left else 1
    return tuple(eps)


def orthonormal_polys(sys: IntervalSystem, w: EdgeClassWeight | BandMeasure, n: int,
                      per_band: int | None = None, tol: float = 1e-8) -> OrthonormalSystem:
    """Orthonormal P_0..P_n for the weight ``w`` via Lanczos on Gauss-Jacobi nodes."""
    meas = w.measure() if isinstance(w, EdgeClassWeight) else w
    per_band = max(2 * n + 60, 120) if per_band is None else per_band
    x, wt = meas.nodes(per_band)
    lo, hi = sys.hull
    res = lanczos(x, wt, n, 0.5 * (lo + hi), 0.5 * (hi - lo))
    if res.gram_residual > tol:
        raise OrthogonalityError(f"Gram residual {res.gram_residual:.2e} above {tol}")
    return res


def gram_residual(sys: IntervalSystem, w: EdgeClassWeight | BandMeasure, ons: OrthonormalSystem,
                  per_band: int = 400) -> float:
    """max |<P_i, P_j> - delta_ij| on an independent, finer quadrature."""
    meas = w.measure() if isinstance(w, EdgeClassWeight) else w
    x, wt = meas.nodes(per_band)
    P = ons.eval_all(x)
    G = (P * wt) @ P.T
    return float(np.max(np.abs(G - np.eye(G.shape[0]))))


def l2_deviation(sys: IntervalSystem, w: EdgeClassWeight | BandMeasure, n: int, **kw) -> float:
    """E_{n-1,2}(x^n; w) = min over q of degree < n of int_E (x^n - q)^2 w dx."""
    return orthonormal_polys(sys, w, n, **kw).squared_deviation(n)


# ---------------------------------------------------------------------------
# bridge


@dataclass
class BridgeReport:
    n: int
    variant: str
    degree: int  # degree of the sup-norm problem
    lhs: float
    rhs: float
    ratio: float
    sigma: list[int]
    eps_sigma: tuple[int, ...]
    eps_argmax: tuple[int, ...]
    argmax_matches_sigma: bool
    l2_by_eps: dict

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "variant": self.variant,
            "degree": self.degree,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "sigma": list(self.sigma),
            "eps_sigma": list(self.eps_sigma),
            "eps_argmax": list(self.eps_argmax),
            "argmax_matches_sigma": self.argmax_matches_sigma,
            "l2_by_eps": [{"eps": list(k), "value": v} for k, v in self.l2_by_eps.items()],
        }


def bridge_compare(sys: IntervalSystem, W: Weight | None, n: int, variant: str = "a",
                   remez_tol: float = 1e-10) -> BridgeReport:
    """Compare E_{2n-1,inf}(x^(2n); W) (variant a) or the degree 2n+1 deviation (variant b)
    with max over eps of E_{n-1,2}(x^n; R_eps / (W h))."""
    if variant not in ("a", "b"):
        raise ValueError("variant is 'a' or 'b'")
    W = UnitWeight() if W is None else W
    table = build_table(sys)
    degree = 2 * n if variant == "a" else 2 * n + 1
    lhs = minimax_monic(sys, W, degree, tol=remez_tol, omega=table.omega_inf).deviation
    # sigma as realized by the gap points (differs from gamma_n's when the
    # inversion falls back to modulus 1)
    sigma = [int(s) for s in solve_for_n(table, W, degree).sigma] if sys.l > 1 else []
    values = {}
    for eps in all_eps(sys.l):
        values[eps] = l2_deviation(sys, EdgeClassWeight(sys, eps, W, variant == "b"), n)
    eps_max = max(values, key=values.get)
    rhs = values[eps_max]
    eps_sig = eps_for_sigma(sigma)
    return BridgeReport(n, variant, degree, lhs, rhs, lhs / rhs, sigma, eps_sig, eps_max,
                        eps_max == eps_sig, values)


# ---------------------------------------------------------------------------
# Pell identity for orthonormal polynomials


@dataclass
class PellReport:
    n: int
    residual: float  # max |R1^2 - H R2^2 - 1| / (1 + |R1|^2 + |H R2^2|) on the off-E grid
    g_fit_residual: float
    g: Polynomial
    x: np.ndarray  # zeros of g, one per gap
    delta: np.ndarray
    remainder: float  # relative remainder of (R P^2 - 2 rho g) / S


def _cheb_of(p: Polynomial, mid: float, half: float) -> np.ndarray:
    """Chebyshev coefficients in t = (x - mid) / half of a power-basis polynomial in x."""
    q = p.convert(kind=Polynomial, domain=[mid - half, mid + half], window=[-1, 1])
    return C.poly2cheb(q.coef)


def pell_verify(sys: IntervalSystem, w: EdgeClassWeight, n: int, grid: np.ndarray | None = None) -> PellReport:
    """Check R P_n^2 - S Q^2 = 2 rho g with S = H / R and Q^2 a polynomial.

    g is fitted at the zeros of S, Q^2 is the polynomial quotient (R P_n^2 - 2 rho g) / S,
    and R1 = R P_n^2 / (rho g) - 1, R2 = Q P_n / (rho g) are tested in R1^2 - H R2^2 = 1
    off E.  The zeros x_j of g and the signs delta_j with (R P_n)(x_j) = delta_j (sqrt(H) Q)(x_j)
    are reported.
    """
    W = w.weight
    if isinstance(W, UnitWeight):
        rho = Polynomial([1.0])
    elif isinstance(W, PolynomialWeight):
        rho = W.polynomial()
    else:
        raise TypeError("the Pell identity needs a polynomial (or unit) weight")
    l = sys.l
    lo, hi = sys.hull
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    ons = orthonormal_polys(sys, w, n)
    Pc = ons.cheb(n)
    Rp = w.R
    Hp = Polynomial.fromroots(sys.endpoints)
    S, rem = divmod(Hp, Rp)
    Sz = np.setdiff1d(np.asarray(sys.endpoints, dtype=float), w.roots)
    # g has degree l - 1 with free leading coefficient, fitted at the zeros of S
    vals = Rp(Sz) * ons(Sz, n) ** 2 / (2.0 * rho(Sz))
    V = np.vander((Sz - mid) / half, l, increasing=True)
    gc, *_ = np.linalg.lstsq(V, vals, rcond=None)
    g_fit = float(np.max(np.abs(V @ gc - vals))) / max(1.0, float(np.max(np.abs(vals))))
    g = Polynomial(gc, domain=[lo, hi]).convert(kind=Polynomial, domain=[-1, 1], window=[-1, 1])
    # numerator and quotient in the Chebyshev basis of t
    Rc, Sc, rhoc, gcc = (_cheb_of(p, mid, half) for p in (Rp, S, rho, g))
    num = C.chebsub(C.chebmul(Rc, C.chebmul(Pc, Pc)), 2.0 * C.chebmul(rhoc, gcc))
    Q2, remc = C.chebdiv(num, Sc)
    remainder = float(np.max(np.abs(remc))) / max(1.0, float(np.max(np.abs(num))))
    if grid is None:
        xs_ = mid + half * np.cos(np.linspace(0.0, math.pi, 41))
        grid = np.concatenate([xs_ + 0.05j * half, xs_ - 0.2j * half, [hi + 0.3 * half, lo - 0.3 * half]])
    z = np.asarray(grid, dtype=complex)
    t = (z - mid) / half
    P = C.chebval(t, Pc)
    den = rho(z) * g(z)
    R1 = Rp(z) * P ** 2 / den - 1.0
    HR2 = eval_H(sys, z) * C.chebval(t, Q2) * P ** 2 / den ** 2
    # relative to the size of the two terms, which grow like |phi|^(4n) away from E
    resid = float(np.max(np.abs(R1 ** 2 - HR2 - 1.0) / (1.0 + np.abs(R1) ** 2 + np.abs(HR2))))
    # zeros of g in the gaps and the signs delta_j
    roots = g.roots()
    xs, deltas = [], []
    q2roots = C.chebroots(Q2) * half + mid
    q2real = np.sort(q2roots[np.abs(q2roots.imag) <= 1e-6 * max(1.0, sys.diam)].real)
    for j, (L, R) in enumerate(sys.gaps):
        inside = [r.real for r in roots if abs(r.imag) <= 1e-8 and L - 1e-9 <= r.real <= R + 1e-9]
        if not inside:
            xs.append(math.nan)
            deltas.append(0)
            continue
        xj = min(max(inside[0], L), R)
        xs.append(xj)
        q_sign = (-1.0) ** (int(np.sum(q2real > xj)) // 2)
        rp = Rp(xj) * ons(np.array([xj]), n)[0]
        sh = gap_sign(sys, j)
        deltas.append(int(np.sign(rp * sh * q_sign)) if rp != 0 else 0)
    return PellReport(n, resid, g_fit, g, np.array(xs), np.array(deltas), remainder)


__all__ = [
    "BandMeasure", "EdgeClassWeight", "OrthonormalSystem", "OrthogonalityError", "lanczos",
    "orthonormal_polys", "gram_residual", "l2_deviation", "all_eps", "eps_for_sigma",
    "BridgeReport", "bridge_compare", "PellReport", "pell_verify",
]
