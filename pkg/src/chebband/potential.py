"""Potential theory of the complement of a finite union of intervals.

Everything is expressed through Abelian differentials N(x) dx / (D(x) sqrt(H(x)))
on the upper sheet: the complex Green's function log phi(z, c), harmonic
measures, the normalized first-kind differentials and their periods.

Conventions used throughout (see :mod:`chebband.domain` for the branch of sqrt(H)):

* log phi(z, c) = int_{a_{2l}}^z dG, so phi(x, c) > 0 for real x > a_{2l} left of
  any exterior pole.
* On the upper bank of E, Im log phi(x+, c) = pi * mass(E n [x, a_{2l}]) minus pi for
  every real pole passed on the way from a_{2l}; the mass density is N / (D h).
* omega_k(z) is the harmonic measure of E_k; its differential is p_k dx / sqrt(H)
  with p_k of degree <= l-2, normalized by the jumps of omega_k across the gaps.
* The normalized differentials D_k dx / sqrt(H) have alpha-periods 2 pi i delta_jk
  for clockwise cycles around E_j, and B_jk are their beta-periods.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate

from .domain import (
    IntervalSystem,
    abs_rest,
    band_sign,
    eval_h_inv,
    gap_sign,
    sqrtH_plus,
    validate_system,
)
from .quadrature import (
    DEFAULT_QUAD,
    CosineSeries,
    QuadConfig,
    QuadratureError,
    cheb_integral,
    cheb_partial,
    pv_integral,
    ray_integral,
    theta_of,
)


class BoundaryError(ValueError):
    """A point lies on E where the requested quantity is undefined."""


# ---------------------------------------------------------------------------
# polynomial helpers: all polynomials live in the hull variable t = (x - mid)/half


def hull_poly(sys: IntervalSystem, coef) -> Polynomial:
    return Polynomial(np.asarray(coef, dtype=float), domain=list(sys.hull), window=[-1, 1])


def x_minus(sys: IntervalSystem, c: float) -> Polynomial:
    """The polynomial x - c in hull coordinates."""
    lo, hi = sys.hull
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return hull_poly(sys, [mid - c, half])


def power_coefficients(p: Polynomial) -> np.ndarray:
    """Coefficients of p in the plain power basis of x (lowest first)."""
    return p.convert(domain=[-1, 1], window=[-1, 1]).coef


def _tpowers(sys: IntervalSystem, x: np.ndarray, m: int) -> np.ndarray:
    lo, hi = sys.hull
    t = (x - 0.5 * (lo + hi)) / (0.5 * (hi - lo))
    return t[None, :] ** np.arange(m)[:, None]


def _gap_skip(j: int) -> tuple[int, int]:
    return (2 * j + 1, 2 * j + 2)


def _band_skip(k: int) -> tuple[int, int]:
    return (2 * k, 2 * k + 1)


# ---------------------------------------------------------------------------


class Differential:
    """dG = N(x) dx / (D(x) sqrt(H(x))) with real N, D and simple poles of residue -1.

    ``real_pole`` is the real pole (if any); complex poles come in conjugate pairs
    through ``D`` and contribute no jumps on the real axis.
    """

    def __init__(self, sys: IntervalSystem, N: Polynomial, D: Polynomial | None = None,
                 real_pole: float | None = None, quad: QuadConfig = DEFAULT_QUAD,
                 complex_poles: Sequence[complex] = ()):
        self.sys = sys
        self.N = N
        self.D = D
        self.pole = real_pole
        self.complex_poles = tuple(complex_poles)
        self.quad = quad
        self._band_series: list[CosineSeries] | None = None

    # -- integrands -------------------------------------------------------
    def ratio(self, x):
        v = self.N(x)
        if self.D is not None:
            v = v / self.D(x)
        return v

    def integrand(self, z):
        z = np.asarray(z, dtype=complex)
        return self.ratio(z) / sqrtH_plus(self.sys, z)

    # -- masses on E -------------------------------------------------------
    @property
    def band_series(self) -> list[CosineSeries]:
        if self._band_series is None:
            out = []
            for k, (lo, hi) in enumerate(self.sys.bands):
                sk = band_sign(self.sys, k) / math.pi
                skip = _band_skip(k)

                def F(x, sk=sk, skip=skip):
                    return sk * self.ratio(x) / np.sqrt(abs_rest(self.sys, x, skip))

                out.append(CosineSeries.fit(F, lo, hi, self.quad))
            self._band_series = out
        return self._band_series

    @property
    def band_masses(self) -> np.ndarray:
        """int_{E_k} N / (D h) dx for each band."""
        return np.array([s.total for s in self.band_series])

    def mass_right(self, x) -> np.ndarray:
        """Mass of E n [x, a_{2l}] for real x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape)
        for s in self.band_series:
            full = x <= s.lo
            part = (x > s.lo) & (x < s.hi)
            out = out + np.where(full, s.total, 0.0)
            if np.any(part):
                cum = s.cumulative(s.theta(x[part]))
                out[part] = out[part] + cum
        return out

    def jumps(self, x) -> np.ndarray:
        """Imaginary-part jumps collected at real poles between a_{2l} and x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        c = self.pole
        if c is None or not math.isfinite(c):
            return np.zeros(x.shape)
        top = self.sys.endpoints[-1]
        return -math.pi * ((x < c) & (c < top)) + math.pi * ((top < c) & (c < x))

    def phase_plus(self, x) -> np.ndarray:
        """Im dG-integral from a_{2l} to x + i0 along the upper bank."""
        return math.pi * self.mass_right(x) + self.jumps(x)

    # -- real part on the real axis off E -------------------------------------
    def _ray(self, a: float, x: float, sign_H: int, skip: tuple[int, ...]) -> float:
        sys = self.sys

        def F(s):
            return self.ratio(s) / (sign_H * np.sqrt(abs_rest(sys, s, skip)))

        if math.isinf(x):
            sgn = 1.0 if x > 0 else -1.0

            def f(u):
                return 2.0 * float(F(np.array([a + sgn * u * u]))[0])

            val, _ = integrate.quad(f, 0.0, math.inf, epsabs=1e-15, epsrel=1e-13, limit=400)
            return sgn * val
        near_pole = self.pole is not None and abs(x - self.pole) < 0.05 * abs(x - a)
        if near_pole:
            sgn = 1.0 if x > a else -1.0
            U = math.sqrt(abs(x - a))

            def f(u):
                return 2.0 * float(F(np.array([a + sgn * u * u]))[0])

            val, _ = integrate.quad(f, 0.0, U, epsabs=1e-15, epsrel=1e-13, limit=400)
            return sgn * val
        return float(ray_integral(F, a, x, self.quad))

    def _right_ray(self, x: float) -> float:
        sys = self.sys
        top = sys.endpoints[-1]
        return self._ray(top, x, 1, (2 * sys.l - 1,))

    def _left_ray(self, x: float) -> float:
        sys = self.sys
        sign = -1 if sys.l % 2 else 1
        return self._ray(sys.endpoints[0], x, sign, (0,))

    def value_at_infinity(self) -> float:
        """Re of the integral from a_{2l} to infinity (finite poles only)."""
        c = self.pole
        top = self.sys.endpoints[-1]
        if c is not None and c > top:
            return self._left_ray(-math.inf)
        return self._right_ray(math.inf)

    def real_part(self, x: float) -> float:
        """Re int_{a_{2l}}^x dG for real x off E (g(x, c) for a Green differential)."""
        sys = self.sys
        c = self.pole
        if math.isinf(x):
            return self.value_at_infinity()
        lo, top = sys.hull
        if x >= top:
            if c is not None and top < c < x:
                return self.value_at_infinity() - self._right_ray_tail(x)
            return self._right_ray(x)
        if x <= lo:
            if c is not None and x < c < lo:
                return self.value_at_infinity() - self._left_ray_tail(x)
            return self._left_ray(x)
        j = sys.gap_of(x)
        if j < 0:
            return 0.0
        L, R = sys.gaps[j]
        gs = gap_sign(sys, j)
        skip = _gap_skip(j)

        def F(s):
            return self.ratio(s) / (gs * np.sqrt(abs_rest(sys, s, skip)))

        tx = float(theta_of(x, L, R))
        if c is not None and L < c < x:
            return -float(cheb_partial(F, L, R, 0.0, tx, self.quad))
        return float(cheb_partial(F, L, R, tx, math.pi, self.quad))

    def _right_ray_tail(self, x: float) -> float:
        """int_x^infinity dG for x > a_{2l}, no pole in between."""
        sys = self.sys
        top = sys.endpoints[-1]

        def f(s):
            s = np.array([s])
            return float((self.ratio(s) / np.sqrt(np.abs(self._H(s))))[0])

        val, _ = integrate.quad(f, x, math.inf, epsabs=1e-15, epsrel=1e-13, limit=400)
        assert x > top
        return val

    def _left_ray_tail(self, x: float) -> float:
        """int_{-infinity}^x dG (orientation: value at x minus value at -infinity)."""
        sys = self.sys
        sign = -1 if sys.l % 2 else 1

        def f(s):
            s = np.array([s])
            return float((self.ratio(s) / (sign * np.sqrt(np.abs(self._H(s)))))[0])

        val, _ = integrate.quad(f, -math.inf, x, epsabs=1e-15, epsrel=1e-13, limit=400)
        return -val

    def _H(self, s):
        out = np.ones_like(s)
        for a in self.sys.endpoints:
            out = out * (s - a)
        return out

    # -- complex values --------------------------------------------------------
    def log_value(self, z: complex) -> complex:
        """int_{a_{2l}}^z dG along a path in the half plane of z (upper bank if z real)."""
        z = complex(z)
        sys = self.sys
        if z.imag == 0.0:
            x = z.real
            ph = float(self.phase_plus(x)[0])
            if sys.band_of(x) >= 0:
                return 1j * ph
            return self.real_part(x) + 1j * ph
        if z.imag < 0:
            return self.log_value(z.conjugate()).conjugate()
        top = sys.endpoints[-1]
        step = 0.5 * sys.diam
        if self.pole is not None and self.pole > top:
            step = min(step, 0.5 * (self.pole - top))
        X = top + step
        base = complex(self.real_part(X), 0.0)
        # up, across and down: a straight segment to a point near E would run just
        # above the real axis and graze the band ends and any real pole in a gap
        upper = [w.imag for w in self.complex_poles if w.imag > 0]
        h = max(0.5 * sys.diam, 2.0 * max(upper, default=0.0))
        if z.imag >= h:
            path = [X, z]
        else:
            path = [X, complex(X, h), complex(z.real, h), z]
            if any(_segment_distance(path[2], z, w) < 1e-3 * sys.diam for w in self.complex_poles):
                path = [X, complex(X, h), z]
        total = base
        for p0, p1 in zip(path, path[1:]):
            total += self._segment(p0, p1)
        return total

    def _segment(self, p0: complex, p1: complex) -> complex:
        d = p1 - p0

        def f(t):
            return complex(self.integrand(np.array([p0 + t * d]))[0] * d)

        with warnings.catch_warnings():
            # near E the integrand is nearly singular; quad's estimate is still reliable
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(f, 0.0, 1.0, complex_func=True, epsabs=1e-14,
                                    epsrel=1e-13, limit=400)
        return val


def _segment_distance(p0: complex, p1: complex, w: complex) -> float:
    d = p1 - p0
    t = ((w - p0) * d.conjugate()).real / abs(d) ** 2
    t = min(1.0, max(0.0, t))
    return abs(p0 + t * d - w)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolePolynomial:
    """Numerator r_c of the Green differential with real pole c (r_c(c) = -sqrt(H(c)))."""

    pole: float
    coeffs: np.ndarray
    degenerate: bool = False
    differential: Differential | None = field(default=None, compare=False, repr=False)

    def g(self, z) -> np.ndarray | float:
        """Green's function g(z, c); identically 0 for a degenerate (endpoint) pole."""
        zs = np.atleast_1d(np.asarray(z))
        if self.degenerate:
            out = np.zeros(zs.shape)
        else:
            out = np.array([_green_from(self.differential, complex(v)) for v in zs.ravel()])
            out = out.reshape(zs.shape)
        return out[0] if np.ndim(z) == 0 else out


@dataclass(frozen=True)
class PotentialTable:
    """Precomputed potential-theoretic data of E."""

    system: IntervalSystem
    r_inf: Polynomial
    hm_polys: tuple[Polynomial, ...]
    D: tuple[Polynomial, ...]
    B: np.ndarray
    omega_inf: np.ndarray
    capacity: float
    quad: QuadConfig
    gap_matrix: np.ndarray
    band_matrix: np.ndarray
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def l(self) -> int:
        return self.system.l

    @property
    def d(self) -> np.ndarray:
        """Power-basis coefficients d[k, s] of the normalized differentials D_k."""
        m = self.l - 1
        out = np.zeros((m, m))
        for k, p in enumerate(self.D):
            c = power_coefficients(p)[:m]
            out[k, : c.size] = c
        return out

    @property
    def infinity(self) -> Differential:
        if "inf" not in self._cache:
            self._cache["inf"] = Differential(self.system, self.r_inf, quad=self.quad)
        return self._cache["inf"]

    def gap_hm_series(self, j: int) -> CosineSeries:
        """Cosine series of p_k / sqrt(H+) in the angle variable of gap j (k = 0..l-2)."""
        key = ("gap_hm", j)
        if key not in self._cache:
            sys = self.system
            L, R = sys.gaps[j]
            gs = gap_sign(sys, j)
            skip = _gap_skip(j)
            P = np.array([p.coef for p in self.hm_polys]).T  # (s, k)

            def F(x):
                T = _tpowers(sys, x, P.shape[0])
                return (P.T @ T) / (gs * np.sqrt(abs_rest(sys, x, skip)))

            self._cache[key] = CosineSeries.fit(F, L, R, self.quad)
        return self._cache[key]

    def to_json(self) -> dict:
        return {
            "endpoints": list(self.system.endpoints),
            "r_inf": power_coefficients(self.r_inf).tolist(),
            "r_inf_hull": self.r_inf.coef.tolist(),
            "hm_polys_hull": [p.coef.tolist() for p in self.hm_polys],
            "D_hull": [p.coef.tolist() for p in self.D],
            "d": self.d.tolist(),
            "B": np.asarray(self.B).tolist(),
            "omega_inf": np.asarray(self.omega_inf).tolist(),
            "capacity": self.capacity,
            "gap_matrix": np.asarray(self.gap_matrix).tolist(),
            "band_matrix": np.asarray(self.band_matrix).tolist(),
        }

    @classmethod
    def from_json(cls, data: dict, quad: QuadConfig = DEFAULT_QUAD) -> "PotentialTable":
        sys = validate_system(data["endpoints"])
        l = sys.l
        return cls(
            system=sys,
            r_inf=hull_poly(sys, data["r_inf_hull"]),
            hm_polys=tuple(hull_poly(sys, c) for c in data["hm_polys_hull"]),
            D=tuple(hull_poly(sys, c) for c in data["D_hull"]),
            B=np.asarray(data["B"], dtype=float).reshape(l - 1, l - 1),
            omega_inf=np.asarray(data["omega_inf"], dtype=float),
            capacity=float(data["capacity"]),
            quad=quad,
            gap_matrix=np.asarray(data["gap_matrix"], dtype=float).reshape(l - 1, l),
            band_matrix=np.asarray(data["band_matrix"], dtype=float).reshape(l, l),
        )


def _gap_matrix(sys: IntervalSystem, quad: QuadConfig) -> np.ndarray:
    """G[j, s] = int_{gap j} t^s / sqrt(H+) dx, s = 0..l-1."""
    l = sys.l
    G = np.zeros((l - 1, l))
    for j, (L, R) in enumerate(sys.gaps):
        gs = gap_sign(sys, j)
        skip = _gap_skip(j)
        G[j] = cheb_integral(
            lambda x: _tpowers(sys, x, l) / (gs * np.sqrt(abs_rest(sys, x, skip))), L, R, quad
        )
    return G


def _band_matrix(sys: IntervalSystem, quad: QuadConfig) -> np.ndarray:
    """M[k, s] = int_{E_k} t^s / h dx, s = 0..l-1."""
    l = sys.l
    M = np.zeros((l, l))
    for k, (lo, hi) in enumerate(sys.bands):
        sk = band_sign(sys, k) / math.pi
        skip = _band_skip(k)
        M[k] = cheb_integral(
            lambda x: sk * _tpowers(sys, x, l) / np.sqrt(abs_rest(sys, x, skip)), lo, hi, quad
        )
    return M


def compute_r_infinity(sys: IntervalSystem, quad: QuadConfig = DEFAULT_QUAD,
                       gap_matrix: np.ndarray | None = None) -> Polynomial:
    """Monic r_inf of degree l-1 whose integrals against 1/sqrt(H) over every gap vanish."""
    l = sys.l
    half = 0.5 * sys.diam
    lead = half ** (l - 1)
    if l == 1:
        return hull_poly(sys, [1.0])
    G = _gap_matrix(sys, quad) if gap_matrix is None else gap_matrix
    try:
        c = np.linalg.solve(G[:, : l - 1], -lead * G[:, l - 1])
    except np.linalg.LinAlgError as exc:  # pragma: no cover - signals quadrature failure
        raise QuadratureError("singular gap system for r_inf") from exc
    return hull_poly(sys, np.append(c, lead))


def _capacity(diff: Differential, sys: IntervalSystem) -> float:
    """exp(lim (log R - g(mid + R))) by polynomial extrapolation in 1/R."""
    lo, hi = sys.hull
    mid = 0.5 * (lo + hi)
    R0 = 8.0 * sys.diam
    Rs = R0 * 2.0 ** np.arange(8)
    vals = np.array([math.log(R) - diff.real_part(mid + R) for R in Rs])
    h = 1.0 / Rs
    # Neville's scheme evaluated at h = 0
    P = vals.copy()
    n = len(h)
    for m in range(1, n):
        for i in range(n - m):
            P[i] = (h[i + m] * P[i] - h[i] * P[i + 1]) / (h[i + m] - h[i])
    return math.exp(P[0])


def build_table(sys: IntervalSystem, quad: QuadConfig = DEFAULT_QUAD) -> PotentialTable:
    """Compute r_inf, harmonic-measure polynomials, periods, omega(inf) and capacity."""
    l = sys.l
    G = _gap_matrix(sys, quad) if l > 1 else np.zeros((0, 1))
    M = _band_matrix(sys, quad)
    r_inf = compute_r_infinity(sys, quad, G if l > 1 else None)
    rc = np.zeros(l)
    rc[: r_inf.coef.size] = r_inf.coef
    omega_inf = M @ rc
    hm: tuple[Polynomial, ...] = ()
    Dp: tuple[Polynomial, ...] = ()
    B = np.zeros((0, 0))
    if l > 1:
        m = l - 1
        rhs = np.zeros((m, m))
        for j in range(m):
            rhs[j, j] -= 1.0
            if j + 1 < m:
                rhs[j, j + 1] += 1.0
        P = np.linalg.solve(G[:, :m], rhs)
        hm = tuple(hull_poly(sys, P[:, k]) for k in range(m))
        Dc = -np.linalg.inv(M[:m, :m])
        Dp = tuple(hull_poly(sys, Dc[:, k]) for k in range(m))
        gapint = G[:, :m] @ Dc  # gapint[i, k] = int_{gap i} D_k / sqrt(H+)
        B = 2.0 * np.flipud(np.cumsum(np.flipud(gapint), axis=0))
    diff = Differential(sys, r_inf, quad=quad)
    cap = _capacity(diff, sys)
    table = PotentialTable(sys, r_inf, hm, Dp, B, omega_inf, cap, quad, G, M)
    table._cache["inf"] = diff
    return table


# ---------------------------------------------------------------------------
# Green's functions


def _green_from(diff: Differential, z: complex) -> float:
    sys = diff.sys
    if z.imag == 0.0:
        if sys.band_of(z.real) >= 0:
            raise BoundaryError(f"g is not defined on E (z = {z.real})")
        return diff.real_part(z.real)
    return diff.log_value(z).real


def green(table: PotentialTable, z):
    """g(z, infinity) for z off E (array input allowed)."""
    zs = np.atleast_1d(np.asarray(z))
    out = np.array([_green_from(table.infinity, complex(v)) for v in zs.ravel()]).reshape(zs.shape)
    return out[0] if np.ndim(z) == 0 else out


def phase_on_E(table: PotentialTable, x):
    """arg phi+(x, infinity) on E, measured from a_{2l} (0 there, pi at a_1)."""
    out = table.infinity.phase_plus(x)
    return out[0] if np.ndim(x) == 0 else out


def log_phi(table: PotentialTable, z, pole: float = math.inf) -> complex:
    """Complex log phi(z, pole) with the path conventions of :class:`Differential`."""
    if math.isinf(pole):
        return table.infinity.log_value(z)
    pp = green_pole(table, pole)
    if pp.degenerate:
        return 0j
    return pp.differential.log_value(z)


def _is_endpoint(sys: IntervalSystem, c: float) -> bool:
    tol = 1e-13 * max(1.0, sys.diam)
    return any(abs(c - a) <= tol for a in sys.endpoints)


def green_pole(table: PotentialTable, c: float) -> PolePolynomial:
    """r_c and the Green's function with pole at the real point c outside E."""
    sys = table.system
    c = float(c)
    if _is_endpoint(sys, c):
        return PolePolynomial(c, np.zeros(sys.l), degenerate=True)
    if sys.band_of(c) >= 0:
        raise BoundaryError(f"pole {c} lies inside E")
    key = ("pole", c)
    if key in table._cache:
        return table._cache[key]
    l = sys.l
    sH = float(sqrtH_plus(sys, c).real)
    xm = x_minus(sys, c)
    if l == 1:
        N = hull_poly(sys, [-sH])
    else:
        v = np.zeros(l - 1)
        for j, (L, R) in enumerate(sys.gaps):
            gs = gap_sign(sys, j)
            skip = _gap_skip(j)

            def F(x, gs=gs, skip=skip):
                return 1.0 / (gs * np.sqrt(abs_rest(sys, x, skip)))

            if L < c < R:
                v[j] = pv_integral(F, L, R, c, table.quad)
            else:
                v[j] = cheb_integral(lambda x, F=F: F(x) / (x - c), L, R, table.quad)
        q = np.linalg.solve(table.gap_matrix[:, : l - 1], sH * v)
        N = hull_poly(sys, [-sH]) + xm * hull_poly(sys, q)
    diff = Differential(sys, N, D=xm, real_pole=c, quad=table.quad)
    pp = PolePolynomial(c, power_coefficients(N), False, diff)
    table._cache[key] = pp
    return pp


def green_c(table: PotentialTable, z, c: float):
    """g(z, c) for a real pole c (c = inf gives g(z, infinity))."""
    if math.isinf(c):
        return green(table, z)
    return green_pole(table, c).g(z)


def pair_differential(table: PotentialTable, w: complex) -> Differential:
    """Green differential with poles at w and conj(w) (Im w != 0): g(z,w) + g(z,conj w)."""
    w = complex(w)
    if w.imag < 0:
        w = w.conjugate()
    key = ("pair", w)
    if key in table._cache:
        return table._cache[key]
    sys = table.system
    l = sys.l
    D = x_minus(sys, 0.0) ** 2 - 2.0 * w.real * x_minus(sys, 0.0) + abs(w) ** 2
    # unknown Q of degree <= l: residue condition at w (2 real equations) + l-1 gap conditions
    rows = []
    rhs = []
    sw = complex(sqrtH_plus(sys, np.array([w]))[0])
    lo, hi = sys.hull
    tw = (w - 0.5 * (lo + hi)) / (0.5 * (hi - lo))
    basis_w = tw ** np.arange(l + 1)
    resid = basis_w / ((w - w.conjugate()) * sw)
    rows.append(resid.real)
    rhs.append(-1.0)
    rows.append(resid.imag)
    rhs.append(0.0)
    for j, (L, R) in enumerate(sys.gaps):
        gs = gap_sign(sys, j)
        skip = _gap_skip(j)
        rows.append(cheb_integral(
            lambda x, gs=gs, skip=skip: _tpowers(sys, x, l + 1)
            / (D(x) * gs * np.sqrt(abs_rest(sys, x, skip))), L, R, table.quad))
        rhs.append(0.0)
    Q = np.linalg.solve(np.array(rows), np.array(rhs))
    diff = Differential(sys, hull_poly(sys, Q), D=D, quad=table.quad, complex_poles=(w, w.conjugate()))
    table._cache[key] = diff
    return diff


# ---------------------------------------------------------------------------
# harmonic measures


def omega_gap(table: PotentialTable, j: int, theta):
    """omega(c) (all l bands) and d omega / d theta for c = m + w cos(theta) in gap j.

    Returns arrays of shape (l, len(theta)).
    """
    l = table.l
    s = table.gap_hm_series(j)
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    part = s.cumulative(np.array([math.pi]))[:, :1] - s.cumulative(th)
    om = np.zeros((l, th.size))
    om[: l - 1] = part
    om[j] += 1.0
    om[l - 1] = 1.0 - om[: l - 1].sum(axis=0)
    dom = np.zeros((l, th.size))
    dom[: l - 1] = -s.value(th)
    dom[l - 1] = -dom[: l - 1].sum(axis=0)
    return om, dom


def harmonic_measures(table: PotentialTable, c: float, method: str = "abel") -> np.ndarray:
    """(omega_1(c), ..., omega_l(c)) for real c outside E or c = inf.

    ``method`` "abel" integrates the first-kind differentials along the real axis;
    "density" integrates the boundary density of the Green's function with pole c.
    """
    sys = table.system
    l = sys.l
    if math.isinf(c):
        return np.asarray(table.omega_inf, dtype=float).copy()
    c = float(c)
    if sys.band_of(c) >= 0 and not _is_endpoint(sys, c):
        raise BoundaryError(f"{c} lies inside E")
    if l == 1:
        return np.ones(1)
    if _is_endpoint(sys, c):
        i = int(np.argmin(np.abs(sys.a - c)))
        out = np.zeros(l)
        out[i // 2] = 1.0
        return out
    if method == "density":
        pp = green_pole(table, c)
        return pp.differential.band_masses
    if method != "abel":
        raise ValueError(f"unknown method {method!r}")
    j = sys.gap_of(c)
    if j >= 0:
        L, R = sys.gaps[j]
        om, _ = omega_gap(table, j, theta_of(c, L, R))
        return om[:, 0]
    P = np.array([p.coef for p in table.hm_polys]).T
    out = np.zeros(l)
    if c > sys.endpoints[-1]:
        a, skip, sign = sys.endpoints[-1], (2 * l - 1,), 1
    else:
        a, skip, sign = sys.endpoints[0], (0,), (-1 if l % 2 else 1)
        out[0] = 1.0

    def F(x):
        return (P.T @ _tpowers(sys, x, P.shape[0])) / (sign * np.sqrt(abs_rest(sys, x, skip)))

    out[: l - 1] += ray_integral(F, a, c, table.quad)
    out[l - 1] = 1.0 - out[: l - 1].sum()
    return out


def harmonic_measure(table: PotentialTable, c: float, k: int, method: str = "abel") -> float:
    """omega_k(c) for the 0-based band index k."""
    return float(harmonic_measures(table, c, method)[k])


def capacity(table: PotentialTable) -> float:
    return table.capacity


def differentials_and_periods(table: PotentialTable) -> tuple[np.ndarray, np.ndarray]:
    """(d, B): coefficients of the normalized differentials and their beta-periods."""
    return table.d, np.asarray(table.B)


def boundary_density(table: PotentialTable, x) -> np.ndarray:
    """Inward normal derivatives d omega_k / dn at x in int(E), k = 0..l-2.

    Equal to pi p_k(x) / h(x) on both banks; shape (l-1, len(x)).
    """
    sys = table.system
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    inside = np.zeros(xs.shape, dtype=bool)
    for lo, hi in sys.bands:
        inside |= (xs > lo) & (xs < hi)
    if not np.all(inside):
        raise BoundaryError("boundary density needs points strictly inside E")
    hinv = eval_h_inv(sys, xs)
    out = np.array([math.pi * p(xs) * hinv for p in table.hm_polys]).reshape(len(table.hm_polys), xs.size)
    return out[:, 0] if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# contour checks (independent of the real-axis reductions)


def _ellipse_around(sys: IntervalSystem, k: int, n: int):
    lo, hi = sys.bands[k]
    left = lo - sys.endpoints[2 * k - 1] if k > 0 else sys.diam
    right = sys.endpoints[2 * k + 2] - hi if k < sys.l - 1 else sys.diam
    margin = 0.5 * min(left, right)
    A = 0.5 * (hi - lo) + margin
    Bax = max(margin, 0.25 * A)
    t = 2 * math.pi * np.arange(n) / n
    m = 0.5 * (lo + hi)
    z = m + A * np.cos(t) - 1j * Bax * np.sin(t)  # clockwise
    dz = (-A * np.sin(t) - 1j * Bax * np.cos(t)) * (2 * math.pi / n)
    return z, dz


def alpha_period(table: PotentialTable, k: int, numer, denom=None, n: int = 4096) -> complex:
    """Clockwise contour integral of numer(z)/(denom(z) sqrt(H(z))) dz around band k."""
    sys = table.system
    z, dz = _ellipse_around(sys, k, n)
    v = numer(z) / sqrtH_plus(sys, z)
    if denom is not None:
        v = v / denom(z)
    return complex(np.sum(v * dz))
