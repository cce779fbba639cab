"""Log-moments, phase data and the Szego function of a weight on E.

The Szego function is built as

    W(z) = exp(mu_0) * prod_j ((z - c_j) phi(z, c_j) / phi(z, inf))^mu_j * I(z),

with anchors c_j at the gap midpoints.  The constants mu solve the l moment
conditions int_E x^s u(x) / h(x) dx = 0 for the residual log-weight
u = log W - mu_0 - sum_j mu_j log|x - c_j|, which makes

    I(z) = exp( sqrt(H(z)) int_E u(x) / ((z - x) h(x)) dx )

single valued with I(inf) = 1.  On E the boundary values are
I(x +- i0) = exp(u(x) +- i Psi(x)), Psi(x) = Im sqrt(H+(x)) * PV int_E u(t) / ((x - t) h(t)) dt,
so |W+| = |W-| = W and the phase of W+ is explicit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .domain import abs_rest, band_sign, eval_H, sqrtH_plus
from .potential import (
    BoundaryError,
    Differential,
    PotentialTable,
    _band_skip,
    _tpowers,
    green_pole,
    pair_differential,
)
from .quadrature import CosineSeries, cheb_integral
from .weights import PolynomialWeight, Weight


def E_moments(table: PotentialTable, f, m: int | None = None) -> np.ndarray:
    """int_E t^s f(x) / h(x) dx for s = 0..m-1 (t the hull variable); default m = l."""
    sys = table.system
    m = sys.l if m is None else m
    out = np.zeros(m)
    for k, (lo, hi) in enumerate(sys.bands):
        sk = band_sign(sys, k) / math.pi
        skip = _band_skip(k)
        out += cheb_integral(
            lambda x: sk * _tpowers(sys, x, m) * f(x) / np.sqrt(abs_rest(sys, x, skip)),
            lo, hi, table.quad)
    return out


def log_moments(table: PotentialTable, W: Weight) -> np.ndarray:
    """L_k = int_E log W(x) p_k(x) / h(x) dx, k = 0..l-2.

    p_k / h is the inward normal derivative of omega_k divided by pi, so L_k equals
    (1/2 pi) times the boundary integral of log W against d omega_k / dn over both banks.
    """
    l = table.l
    if l == 1:
        return np.zeros(0)
    W.check_positive(table.system)
    b = E_moments(table, W.log, l - 1)
    P = np.array([p.coef for p in table.hm_polys]).T
    return P.T @ b


def reduce_phase(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Binary shift sigma and gamma in [0, 1] with gamma = t + sigma mod 2.

    A tie at exactly 1 keeps sigma = 0; residues within 1e-12 of 2 count as 0.
    """
    t = np.asarray(t, dtype=float)
    r = np.mod(t, 2.0)
    r = np.where(np.abs(r - 2.0) < 1e-12, 0.0, r)
    r = np.where(np.abs(r - 1.0) < 1e-12, 1.0, r)
    sigma = (r > 1.0).astype(int)
    gamma = np.where(sigma == 1, r - 1.0, r)
    return gamma, sigma


def gamma_n(table: PotentialTable, W: Weight, n: int, L: np.ndarray | None = None):
    """(gamma, sigma) for degree n: gamma_k = n omega_k(inf) + L_k + sigma_k mod 2 in [0, 1]."""
    l = table.l
    if l == 1:
        return np.zeros(0), np.zeros(0, dtype=int)
    L = log_moments(table, W) if L is None else L
    t = n * np.asarray(table.omega_inf[: l - 1]) + L
    return reduce_phase(t)


@dataclass
class SzegoData:
    """Szego function of W on E (see module docstring)."""

    table: PotentialTable
    weight: Weight
    L: np.ndarray
    mu: np.ndarray
    anchors: np.ndarray
    W_inf: float
    _u_series: list = field(default_factory=list, repr=False)

    # -- residual log weight --------------------------------------------------
    def u(self, x):
        x = np.asarray(x, dtype=float)
        v = self.weight.log(x) - self.mu[0]
        for mj, cj in zip(self.mu[1:], self.anchors):
            v = v - mj * np.log(np.abs(x - cj))
        return v

    def _series(self) -> list[CosineSeries]:
        if not self._u_series:
            sys = self.table.system
            for k, (lo, hi) in enumerate(sys.bands):
                sk = band_sign(sys, k) / math.pi
                skip = _band_skip(k)
                self._u_series.append(CosineSeries.fit(
                    lambda x, sk=sk, skip=skip: sk * self.u(x) / np.sqrt(abs_rest(sys, x, skip)),
                    lo, hi, self.table.quad))
        return self._u_series

    def _cauchy(self, z: np.ndarray, skip_band: int | None = None) -> np.ndarray:
        """sum over bands of int u(t) / ((z - t) h(t)) dt, optionally skipping one band."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.zeros(z.shape, dtype=complex)
        for k, s in enumerate(self._series()):
            if k != skip_band:
                out = out + s.cauchy(z)
        return out

    def psi(self, x) -> np.ndarray:
        """Psi(x) = Im log I+(x) on E."""
        sys = self.table.system
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(xs.shape)
        series = self._series()
        for k, (lo, hi) in enumerate(sys.bands):
            sel = (xs >= lo) & (xs <= hi)
            if not np.any(sel):
                continue
            xk = xs[sel]
            s = series[k]
            w = 0.5 * (hi - lo)
            pv = -s.glauert(s.theta(xk)) / w + self._cauchy(xk, skip_band=k).real
            out[sel] = band_sign(sys, k) * np.sqrt(np.abs(eval_H(sys, xk))) * pv
        return out

    # -- values ----------------------------------------------------------------
    def boundary_modulus(self, x) -> np.ndarray:
        """|W+(x)| = |W-(x)|, reconstructed from the factorization (equals W on E)."""
        x = np.asarray(x, dtype=float)
        v = self.mu[0] + self.u(x)
        for mj, cj in zip(self.mu[1:], self.anchors):
            v = v + mj * np.log(np.abs(x - cj))
        return np.exp(v)

    def boundary_phase(self, x) -> np.ndarray:
        """arg W+(x) on E, zero at a_{2l}; arg W-(x) = -arg W+(x)."""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = self.psi(xs)
        inf = self.table.infinity
        for mj, cj in zip(self.mu[1:], self.anchors):
            d = green_pole(self.table, cj).differential
            out = out + mj * math.pi * (d.mass_right(xs) - inf.mass_right(xs))
        return out

    def boundary_plus(self, x) -> np.ndarray:
        return self.boundary_modulus(x) * np.exp(1j * self.boundary_phase(x))

    def log_value(self, z: complex) -> complex:
        """log W(z) for z off E (branch continued from the positive values right of E)."""
        z = complex(z)
        sys = self.table.system
        if z.imag == 0.0 and sys.band_of(z.real) >= 0:
            raise BoundaryError("use boundary_plus on E")
        inf = self.table.infinity
        Ginf = inf.log_value(z)
        v = complex(self.mu[0])
        for mj, cj in zip(self.mu[1:], self.anchors):
            d = green_pole(self.table, cj).differential
            lz = np.log(complex(z - cj)) if z.imag != 0 or z.real > cj else complex(math.log(cj - z.real), math.pi)
            v += mj * (lz + d.log_value(z) - Ginf)
        v += complex(sqrtH_plus(sys, np.array([z]))[0] * self._cauchy(np.array([z]))[0])
        return v

    def value(self, z) -> complex:
        return complex(np.exp(self.log_value(z)))


def szego_function(table: PotentialTable, W: Weight) -> SzegoData:
    """Construct the Szego function of W (divisor convention) on E."""
    sys = table.system
    l = sys.l
    W.check_positive(sys)
    anchors = np.array([0.5 * (L + R) for L, R in sys.gaps])
    A = np.zeros((l, l))
    A[:, 0] = table.band_matrix.sum(axis=0)
    for j, cj in enumerate(anchors):
        A[:, j + 1] = E_moments(table, lambda x, cj=cj: np.log(np.abs(x - cj)))
    b = E_moments(table, W.log)
    mu = np.linalg.solve(A, b)
    P = np.array([p.coef for p in table.hm_polys]).T if l > 1 else np.zeros((0, 0))
    L = P.T @ b[: l - 1] if l > 1 else np.zeros(0)
    logWinf = mu[0]
    for mj, cj in zip(mu[1:], anchors):
        d = green_pole(table, cj).differential
        logWinf += mj * (math.log(table.capacity) + d.value_at_infinity())
    return SzegoData(table, W, L, mu, anchors, math.exp(logWinf))


def szego_at_infinity(table: PotentialTable, W: Weight) -> float:
    """W(inf) = exp(int_E log W r_inf / h dx), independent of the anchor construction."""
    rc = np.zeros(table.l)
    rc[: table.r_inf.coef.size] = table.r_inf.coef
    return math.exp(float(rc @ E_moments(table, W.log)))


class OmegaProduct:
    """Omega(z) = rho(z) prod_j (phi(z, w_j) / phi(z, inf))^nu_j for a polynomial weight rho.

    Omega has no zeros or poles off E and |Omega(x +- i0)| = rho(x) on E.
    """

    def __init__(self, table: PotentialTable, rho: PolynomialWeight):
        self.table = table
        self.rho = rho
        self.factors: list[tuple[Differential, int, int]] = []  # (differential, nu, #poles)
        for r, m in rho.real_roots:
            pp = green_pole(table, r)
            if pp.degenerate:
                raise BoundaryError(f"root {r} is a band endpoint")
            self.factors.append((pp.differential, m, 1))
        for w, m in rho.upper_roots:
            self.factors.append((pair_differential(table, w), m, 2))

    @property
    def nu(self) -> int:
        return self.rho.degree

    def log_abs(self, z) -> float:
        z = complex(z)
        inf = self.table.infinity
        gi = inf.log_value(z).real
        v = math.log(abs(complex(self.rho.analytic(np.array([z]))[0])))
        for d, m, npoles in self.factors:
            v += m * (d.log_value(z).real - npoles * gi)
        return v

    def log_value(self, z) -> complex:
        z = complex(z)
        Gi = self.table.infinity.log_value(z)
        v = complex(np.log(complex(self.rho.analytic(np.array([z]))[0])))
        for d, m, npoles in self.factors:
            v += m * (d.log_value(z) - npoles * Gi)
        return v

    def boundary_phase(self, x) -> np.ndarray:
        """arg Omega+(x) on E (rho > 0 there)."""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        inf = self.table.infinity
        out = np.zeros(xs.shape)
        for d, m, npoles in self.factors:
            out = out + m * (d.phase_plus(xs) - npoles * inf.phase_plus(xs))
        return out

    def boundary_plus(self, x) -> np.ndarray:
        return self.rho(x) * np.exp(1j * self.boundary_phase(x))

    @property
    def at_infinity(self) -> float:
        """|Omega(inf)| = scale cap^nu prod_j exp(nu_j g(w_j, inf))."""
        v = self.nu * math.log(self.table.capacity) + math.log(self.rho.scale)
        for d, m, _ in self.factors:
            v += m * d.value_at_infinity()
        return math.exp(v)


def omega_product(table: PotentialTable, rho: PolynomialWeight) -> OmegaProduct:
    rho.check_positive(table.system)
    return OmegaProduct(table, rho)


# ---------------------------------------------------------------------------
# polynomial approximation of a weight


@dataclass
class WeightApproximation:
    """A polynomial weight rho close to W with matched log-moments."""

    weight: PolynomialWeight
    polynomial: np.polynomial.Polynomial
    rel_error: float  # max_E |rho / W - 1|
    mismatch: np.ndarray  # int_E t^s log(rho / W) / h dx, s = 0..l-1
    newton_steps: int


def approx_weight_poly(table: PotentialTable, W: Weight, nu: int, tol: float = 1e-13,
                       max_newton: int = 30) -> WeightApproximation:
    """Degree-nu polynomial rho with small ||rho / W - 1|| on E and zero log-moment mismatch.

    A relative minimax fit is followed by Newton steps on the l lowest Chebyshev
    coefficients (hull variable) that drive the mismatch vector to zero.  Raises
    :class:`~chebband.weights.WeightError` when the fit is not positive on E.
    """
    from numpy.polynomial import chebyshev as C

    from .remez import _band_share, _hull_bands, _initial_reference, minimax_core
    from .weights import WeightError

    sys = table.system
    l = sys.l
    W.check_positive(sys)
    mid, half, bands_t = _hull_bands(sys)

    def w_t(t):
        return W(mid + half * t)

    ref0 = _initial_reference(bands_t, _band_share(sys, table.omega_inf), nu + 2)
    core = minimax_core(w_t, w_t, nu, bands_t, ref0, per_band=max(400, 30 * (nu + 2)))
    coef = np.zeros(max(nu + 1, l))
    coef[: core.coef.size] = core.coef
    grids = [0.5 * (a + b) + 0.5 * (b - a) * np.cos(np.linspace(0, math.pi, 2000)) for a, b in bands_t]
    if min(float(np.min(C.chebval(g, coef))) for g in grids) <= 0:
        raise WeightError(f"degree {nu} approximation is not positive on E")

    def q(x, c):
        return C.chebval((np.asarray(x) - mid) / half, c)

    def mismatch(c):
        return E_moments(table, lambda x: np.log(q(x, c)) - W.log(x))

    F = mismatch(coef)
    steps = 0
    while np.max(np.abs(F)) > tol and steps < max_newton:
        J = np.zeros((l, l))
        for i in range(l):
            e = np.zeros(i + 1)
            e[i] = 1.0
            J[:, i] = E_moments(table, lambda x, e=e: C.chebval((x - mid) / half, e) / q(x, coef))
        step = np.linalg.solve(J, -F)
        lam = 1.0
        while lam > 1e-4:
            trial = coef.copy()
            trial[:l] += lam * step
            if min(float(np.min(C.chebval(g, trial))) for g in grids) > 0:
                Ft = mismatch(trial)
                if np.max(np.abs(Ft)) < np.max(np.abs(F)):
                    break
            lam *= 0.5
        else:
            break
        coef, F = trial, Ft
        steps += 1
    poly = np.polynomial.Chebyshev(coef, domain=[sys.hull[0], sys.hull[1]]).convert(
        kind=np.polynomial.Polynomial, domain=[-1, 1], window=[-1, 1])
    rho = PolynomialWeight.from_polynomial(poly)
    xs = np.concatenate([mid + half * g for g in grids])
    rel = float(np.max(np.abs(q(xs, coef) / W(xs) - 1.0)))
    return WeightApproximation(rho, poly, rel, F, steps)


# ---------------------------------------------------------------------------
# first-kind differentials phi_k = -D_k dz / sqrt(H): boundary and jump integrals
#
# The sign makes the alpha-periods of phi_k run counterclockwise.  With it
#   jump_integral(c)              = B omega(c)                (mod 2B),
#   boundary_log_integral(W)      = -B L(W),
#   boundary_log_integral(rho)    = sum_j nu_j (jump(inf) - jump(w_j)).


def boundary_log_integral(table: PotentialTable, W: Weight) -> np.ndarray:
    """(2 / pi i) int_{E+} phi_k+ log W for k = 0..l-2.

    E+ is the upper bank traversed from a_1 to a_{2l}.  The integral is taken
    directly against sqrt(H+) with an algebraic endpoint rule, independently of the
    moment quadrature, so it can be checked against -B L from the log-moments.
    """
    from scipy.integrate import IntegrationWarning, quad

    sys = table.system
    out = np.zeros(table.l - 1, dtype=complex)
    for k, D in enumerate(table.D):
        for lo, hi in sys.bands:
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)

            def f(th, part):
                # x = mid - half cos(th) turns dx / sqrt((x - lo)(hi - x)) into d(th)
                x = mid - half * math.cos(th)
                v = D(x) * W.log(np.array([x]))[0] * half * math.sin(th)
                v = v / sqrtH_plus(sys, np.array([complex(x)]))[0]
                return v.real if part == 0 else v.imag
            with warnings.catch_warnings():
                # roundoff near the band ends where log W may be singular
                warnings.simplefilter("ignore", IntegrationWarning)
                re = quad(f, 0.0, math.pi, args=(0,), limit=200)[0]
                im = quad(f, 0.0, math.pi, args=(1,), limit=200)[0]
            out[k] -= re + 1j * im  # phi_k carries -D_k
    return (2.0 / (math.pi * 1j) * out).real


def jump_integral(table: PotentialTable, c) -> np.ndarray:
    """int from c- to c+ of phi_k, k = 0..l-2, for c off E (c may be complex or inf).

    The path runs from c on the lower sheet to a_{2l} and back to c on the upper
    sheet, which equals 2 int_{a_{2l}}^{c} phi_k on the upper sheet.  Modulo 2B
    this is sum_kappa omega_kappa(c) B_{k kappa}.
    """
    from scipy.integrate import quad

    sys = table.system
    a = float(sys.endpoints[-1])
    out = np.zeros(table.l - 1, dtype=complex)
    for k, D in enumerate(table.D):
        if isinstance(c, float) and math.isinf(c):
            def g(u):
                x = a + u * u
                return 2.0 * u * (D(x) / sqrtH_plus(sys, np.array([complex(x)]))[0]).real
            out[k] = -2.0 * quad(g, 0.0, np.inf, limit=400)[0]
            continue
        cz = complex(c)
        if cz.imag < 0.0:
            out[k] = np.conj(jump_integral(table, cz.conjugate())[k])
            continue

        def f(s, part):
            z = a + (cz - a) * s * s  # s^2 absorbs the endpoint square root
            v = D(z) / sqrtH_plus(sys, np.array([z]))[0] * (cz - a) * 2.0 * s
            return v.real if part == 0 else v.imag
        re = quad(f, 0.0, 1.0, args=(0,), limit=400)[0]
        im = quad(f, 0.0, 1.0, args=(1,), limit=400)[0]
        out[k] = -2.0 * (re + 1j * im)
    return out
