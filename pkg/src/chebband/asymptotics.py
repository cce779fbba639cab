"""Asymptotic representation of weighted minimal polynomials.

For degree n the gap points c_{j,n} from the inversion problem define

    psi_n(z) = phi(z, inf)^n W(z) / prod_j phi(z, c_{j,n}),

where W(z) is the Szego function of the weight and factors with c_{j,n} at a
band end are 1.  With M_n the minimal polynomial normalized by its deviation,
2 M_n(x) ~ psi_n+(x) + psi_n-(x) on E and M_n(z) ~ psi_n(z) / 2 off E.  For a
polynomial weight rho the same formulas are exact trigonometric identities:
R_n = cos chi_n satisfies the Pell equation R_n^2 - H S_n^2 = 1 on E.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import eval_H
from .inversion import InversionSolution, solve_for_n
from .potential import BoundaryError, PotentialTable, green, green_pole, harmonic_measures
from .szego import OmegaProduct, SzegoData, log_moments, omega_product, szego_function
from .weights import PolynomialWeight, UnitWeight, Weight

DOMINANCE = 1e6


@dataclass
class AsymptoticModel:
    """Everything needed to evaluate the degree-n asymptotics on one system."""

    table: PotentialTable
    szego: SzegoData | OmegaProduct
    sol: InversionSolution
    n: int
    weight: Weight
    W_inf: float

    @property
    def interior(self) -> np.ndarray:
        """Mask of gap points strictly inside their gaps."""
        return ~np.asarray(self.sol.endpoint_flags, dtype=bool)

    def pole_differentials(self):
        return [green_pole(self.table, c).differential
                for c, ok in zip(self.sol.c, self.interior) if ok]

    # -- phases on E -------------------------------------------------------
    def theta(self, x) -> np.ndarray:
        """Theta_n(x) = arg psi_n+(x) on E."""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = self.n * self.table.infinity.phase_plus(xs) + self.szego.boundary_phase(xs)
        for d in self.pole_differentials():
            out = out - d.phase_plus(xs)
        return out

    def log_psi(self, z) -> complex:
        z = complex(z)
        sys = self.table.system
        if z.imag == 0.0 and sys.band_of(z.real) >= 0:
            raise BoundaryError("psi_n is evaluated off E; use predict_on_E on E")
        v = self.n * self.table.infinity.log_value(z) + self.szego.log_value(z)
        for d in self.pole_differentials():
            v -= d.log_value(z)
        return v


def build_model(table: PotentialTable, W: Weight | None, n: int,
                sol: InversionSolution | None = None, L: np.ndarray | None = None) -> AsymptoticModel:
    """Assemble Szego data and gap points for degree n.

    Polynomial weights use the explicit product form of the Szego function.
    """
    W = UnitWeight() if W is None else W
    if isinstance(W, PolynomialWeight):
        sz: SzegoData | OmegaProduct = omega_product(table, W)
        w_inf = sz.at_infinity
    else:
        sz = szego_function(table, W)
        w_inf = sz.W_inf
    if sol is None:
        sol = solve_for_n(table, W, n, L)
    return AsymptoticModel(table, sz, sol, n, W, w_inf)


def psi(model: AsymptoticModel, z) -> complex:
    """psi_n(z) off E."""
    return complex(np.exp(model.log_psi(z)))


def predict_on_E(model: AsymptoticModel, x) -> np.ndarray:
    """Predicted 2 M_n(x) = W(x) 2 cos Theta_n(x) on E."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(model.table.system.contains(xs)):
        raise BoundaryError("predict_on_E needs points on E")
    return 2.0 * model.weight(xs) * np.cos(model.theta(xs))


def predict_off_E(model: AsymptoticModel, z, dominance: float = DOMINANCE) -> complex:
    """Predicted M_n(z) off E.

    When |phi(z, inf)|^(2n) is below ``dominance`` the second branch W(z)^2 / psi_n(z)
    is added, which needs the holomorphic continuation of the weight.
    """
    lp = model.log_psi(z)
    out = 0.5 * np.exp(lp)
    g = model.table.infinity.log_value(complex(z)).real
    if 2.0 * model.n * g < math.log(dominance):
        hol = model.weight.analytic
        if hol is None:
            raise BoundaryError(
                f"z = {z} is too close to E for the one-branch formula and the weight has no continuation")
        wz = complex(np.asarray(hol(np.array([complex(z)])))[0])
        out = out + 0.5 * wz ** 2 * np.exp(-lp)
    return complex(out)


def predict_deviation(model: AsymptoticModel) -> float:
    """Predicted minimal deviation ||M_n / W||: 2 cap^n prod_j phi(c_j, inf) / W(inf)."""
    table = model.table
    v = math.log(2.0) + model.n * math.log(table.capacity) - math.log(model.W_inf)
    for c, ok in zip(model.sol.c, model.interior):
        if ok:
            v += float(green(table, c))
    return math.exp(v)


@dataclass
class ZeroCountPrediction:
    per_band: np.ndarray
    raw: np.ndarray
    defect: float
    gap_zero: np.ndarray  # gap j holds one zero near c_j
    c: np.ndarray


def band_log_moments(table: PotentialTable, W: Weight) -> np.ndarray:
    """L_k for all l bands (the last is minus the sum of the others)."""
    if table.l == 1:
        return np.zeros(1)
    L = log_moments(table, W)
    return np.append(L, -L.sum())


def predict_zero_counts(model: AsymptoticModel, tol: float = 1e-6) -> ZeroCountPrediction:
    """Zeros of M_n per band: n omega_k(inf) + L_k - sum over interior c_j of omega_k(c_j)."""
    table = model.table
    raw = model.n * np.asarray(table.omega_inf, dtype=float) + band_log_moments(table, model.weight)
    for c, ok in zip(model.sol.c, model.interior):
        if ok:
            raw = raw - harmonic_measures(table, c)
    counts = np.round(raw)
    defect = float(np.max(np.abs(raw - counts)))
    if defect > tol:
        raise ValueError(f"zero-count rounding defect {defect:.3e} exceeds {tol}")
    return ZeroCountPrediction(counts.astype(int), raw, defect, model.interior.copy(),
                               np.asarray(model.sol.c, dtype=float))


# ---------------------------------------------------------------------------
# polynomial weights: exact trigonometric form


def _require_poly(model: AsymptoticModel) -> PolynomialWeight:
    if not isinstance(model.weight, PolynomialWeight):
        raise TypeError("the trigonometric representation needs a polynomial weight")
    return model.weight


def chi(model: AsymptoticModel, x) -> np.ndarray:
    """chi_n(x) = (n - nu) arg phi+(x, inf) + sum nu_j arg phi+(x, w_j) - sum arg phi+(x, c_j)."""
    _require_poly(model)
    return model.theta(x)


def rational_R_n(model: AsymptoticModel, x) -> np.ndarray:
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(model.table.system.contains(xs)):
        raise BoundaryError("R_n is evaluated on E")
    return np.cos(chi(model, xs))


def rational_S_n(model: AsymptoticModel, x) -> np.ndarray:
    """S_n = sin chi_n / sqrt(-H) on E, so that R_n^2 - H S_n^2 = 1."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(model.table.system.contains(xs)):
        raise BoundaryError("S_n is evaluated on E")
    return np.sin(chi(model, xs)) / np.sqrt(-eval_H(model.table.system, xs).real)


def gap_polynomial(model: AsymptoticModel) -> np.polynomial.Polynomial:
    """g_(n)(x) = prod_j (x - c_{j,n}) over all gap points."""
    return np.polynomial.Polynomial.fromroots(np.asarray(model.sol.c, dtype=float))


def rational_P(model: AsymptoticModel, x) -> np.ndarray:
    """rho g_(n) R_n on E, the restriction of a polynomial of degree n + l - 1."""
    rho = _require_poly(model)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    return rho(xs) * gap_polynomial(model)(xs) * rational_R_n(model, xs)


def rational_deviation(model: AsymptoticModel) -> float:
    """E_{n-1}(x^n; rho) ~ 2 cap^(n - nu) prod_j phi(c_j, inf) / prod_j phi(w_j, inf)^nu_j."""
    _require_poly(model)
    return predict_deviation(model)


def pell_residual(model: AsymptoticModel, x) -> float:
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    R = rational_R_n(model, xs)
    S = rational_S_n(model, xs)
    return float(np.max(np.abs(R ** 2 - eval_H(model.table.system, xs).real * S ** 2 - 1.0)))


def alternation_points(model: AsymptoticModel, tol: float = 1e-9) -> np.ndarray:
    """Points of E where |cos Theta_n| = 1, found band by band from the monotone phase."""
    from scipy.optimize import brentq

    pts = []
    for lo, hi in model.table.system.bands:
        a, b = (float(v) for v in model.theta(np.array([lo, hi])))
        k_lo = math.ceil(min(a, b) / math.pi - tol)
        k_hi = math.floor(max(a, b) / math.pi + tol)
        for k in range(k_lo, k_hi + 1):
            target = k * math.pi
            if abs(a - target) <= tol * math.pi:
                pts.append(lo)
            elif abs(b - target) <= tol * math.pi:
                pts.append(hi)
            else:
                pts.append(brentq(lambda t: float(model.theta(np.array([t]))[0]) - target, lo, hi,
                                  xtol=1e-15))
    return np.unique(np.array(pts))


__all__ = [
    "AsymptoticModel", "build_model", "psi", "predict_on_E", "predict_off_E", "predict_deviation",
    "predict_zero_counts", "ZeroCountPrediction", "band_log_moments", "chi", "rational_R_n",
    "rational_S_n", "rational_P", "gap_polynomial", "rational_deviation", "pell_residual", "alternation_points",
]
