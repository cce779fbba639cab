"""Real Jacobi inversion: one point c_j in each closed gap with prescribed harmonic-measure sums.

Gap points are parametrized by angles theta_j in [0, pi] (c = m_j + w_j cos theta_j,
theta = 0 at the right end of gap j).  In these coordinates the map
c -> sum_j omega_k(c_j) is smooth up to the gap ends, so Newton-type iterations
can sit on an endpoint without special casing.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, least_squares

from .potential import PotentialTable, omega_gap
from .quadrature import theta_of
from .szego import gamma_n, log_moments, reduce_phase
from .weights import Weight


class InversionError(RuntimeError):
    """The inversion problem could not be solved to tolerance."""

    def __init__(self, message: str, best: "InversionSolution | None" = None):
        super().__init__(message)
        self.best = best


@dataclass
class InversionSolution:
    n: int | None
    gamma: np.ndarray
    sigma: np.ndarray
    c: np.ndarray
    endpoint_flags: np.ndarray
    residual: float
    theta: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))
    modulus: int = 2
    converged: bool = True
    mod1_residual: float = 0.0

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "gamma": [float(v) for v in self.gamma],
            "sigma": [int(v) for v in self.sigma],
            "c": [float(v) for v in self.c],
            "endpoint_flags": [bool(v) for v in self.endpoint_flags],
            "residual": float(self.residual),
            "modulus": self.modulus,
            "mod1_residual": float(self.mod1_residual),
        }


def _c_of_theta(table: PotentialTable, theta: np.ndarray) -> np.ndarray:
    return np.array([0.5 * (L + R) + 0.5 * (R - L) * math.cos(t)
                     for (L, R), t in zip(table.system.gaps, theta)])


def abel_forward(table: PotentialTable, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """F_k = sum_j omega_k(c_j(theta_j)) for k = 0..l-2 and its Jacobian dF_k / dtheta_j."""
    m = table.l - 1
    F = np.zeros(m)
    J = np.zeros((m, m))
    for j in range(m):
        om, dom = omega_gap(table, j, theta[j])
        F += om[:m, 0]
        J[:, j] = dom[:m, 0]
    return F, J


def abel_sum(table: PotentialTable, c) -> np.ndarray:
    """sum_j omega_k(c_j), k = 0..l-2, for gap points c (closed gaps allowed)."""
    m = table.l - 1
    out = np.zeros(m)
    for j, cj in enumerate(np.atleast_1d(c)):
        L, R = table.system.gaps[j]
        if not L <= cj <= R:
            raise ValueError(f"point {cj} is outside gap {j}")
        om, _ = omega_gap(table, j, theta_of(cj, L, R))
        out += om[:m, 0]
    return out


def abel_tilde(table: PotentialTable, x) -> np.ndarray:
    """t_k = (1/2) sum_j omega_k(x_j) for interior gap points x_j."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    for j, xj in enumerate(x):
        L, R = table.system.gaps[j]
        if not L < xj < R:
            raise ValueError(f"point {xj} is not inside gap {j}")
    return 0.5 * abel_sum(table, x)


def torus_defect(F: np.ndarray, target: np.ndarray, modulus: float) -> float:
    d = np.asarray(F, dtype=float) - np.asarray(target, dtype=float)
    d = d - modulus * np.round(d / modulus)
    return float(np.max(np.abs(d))) if d.size else 0.0


def _finish(table, theta, gamma, modulus, n=None, sigma=None, converged=True) -> InversionSolution:
    theta = np.clip(np.asarray(theta, dtype=float), 0.0, math.pi)
    flags = (theta <= 1e-9) | (theta >= math.pi - 1e-9)
    theta = np.where(theta <= 1e-9, 0.0, np.where(theta >= math.pi - 1e-9, math.pi, theta))
    c = _c_of_theta(table, theta)
    # snap flagged points exactly onto the endpoints
    for j, (L, R) in enumerate(table.system.gaps):
        if flags[j]:
            c[j] = R if theta[j] == 0.0 else L
    F, _ = abel_forward(table, theta)
    res = torus_defect(F, gamma, modulus)
    sig = np.zeros(len(gamma), dtype=int) if sigma is None else np.asarray(sigma)
    return InversionSolution(n, np.asarray(gamma, dtype=float), sig, c, flags, res, theta,
                             modulus, converged)


def _solve_shift(table, target, x0, tol, pinned=None):
    """Least squares for abel_forward(theta) = target.

    ``pinned`` maps gap indices to fixed angles 0 or pi.  d omega / d theta vanishes
    at the gap ends, so iterates converge slowly onto solutions there; pinning the
    coordinates reaches such solutions exactly.
    """
    pinned = pinned or {}
    free = [j for j in range(len(target)) if j not in pinned]
    full = np.asarray(x0, dtype=float).copy()
    for j, v in pinned.items():
        full[j] = v

    def expand(th_free):
        th = full.copy()
        th[free] = th_free
        return th

    if not free:
        th = expand(np.zeros(0))
        return th, float(np.max(np.abs(abel_forward(table, th)[0] - target)))

    def fun(th_free):
        return abel_forward(table, expand(th_free))[0] - target

    def jac(th_free):
        return abel_forward(table, expand(th_free))[1][:, free]

    sol = least_squares(fun, full[free], jac=jac, bounds=(0.0, math.pi), xtol=1e-15, ftol=1e-15,
                        gtol=1e-15, method="trf", max_nfev=200)
    return expand(sol.x), float(np.max(np.abs(sol.fun)))


def _pin_patterns(m: int):
    """Pinning patterns ordered by the number of pinned coordinates, starting with none."""
    pats = [dict(zip(idx, ends))
            for k in range(1, m + 1)
            for idx in itertools.combinations(range(m), k)
            for ends in itertools.product((0.0, math.pi), repeat=k)]
    return [None] + pats


def solve_inversion(table: PotentialTable, gamma, modulus: int = 2, x0=None,
                    tol: float = 1e-11, strict: bool = False) -> InversionSolution:
    """Gap points c with sum_j omega_k(c_j) = gamma_k mod ``modulus``.

    All integer lifts gamma + modulus * s inside the range of the map are tried; the
    first lift solved to ``tol`` is returned.  When no lift is solved with all points
    free, points are pinned to gap ends, fewest first.  ``x0`` optionally gives starting
    angles (default: gap midpoints).  With ``strict`` an unsolvable instance raises
    :class:`InversionError`, otherwise the best iterate is returned with
    ``converged = False``.
    """
    l = table.l
    gamma = np.asarray(gamma, dtype=float)
    if l == 1:
        return InversionSolution(None, gamma, np.zeros(0, dtype=int), np.zeros(0),
                                 np.zeros(0, dtype=bool), 0.0, np.zeros(0), modulus)
    m = l - 1
    if m == 1:
        # omega_1 decreases from 1 (left end) to 0 (right end) across the single gap
        T = float(np.mod(gamma[0], modulus))
        if abs(T - modulus) < 1e-13:
            T = 0.0
        if T > 1.0 + 1e-13:
            best = _finish(table, [0.0], gamma, modulus, converged=False)
        else:
            T = min(T, 1.0)

            def f(t):
                return abel_forward(table, np.array([t]))[0][0] - T

            fa, fb = f(0.0), f(math.pi)
            if abs(fa) <= tol:
                th = 0.0
            elif abs(fb) <= tol:
                th = math.pi
            else:
                th = brentq(f, 0.0, math.pi, xtol=1e-15, maxiter=200)
            best = _finish(table, [th], gamma, modulus)
        best.converged = best.residual <= tol
        if strict and not best.converged:
            raise InversionError("no gap point realizes the requested harmonic measure", best)
        return best

    start = np.full(m, 0.5 * math.pi) if x0 is None else np.asarray(x0, dtype=float)
    lifts = []
    ranges = [range(0, int(math.floor((m - g) / modulus + 1e-12)) + 1) for g in np.mod(gamma, modulus)]
    for s in itertools.product(*ranges):
        lifts.append(np.mod(gamma, modulus) + modulus * np.array(s))
    best_theta, best_res = start, math.inf
    for pinned in _pin_patterns(m):
        for T in lifts:
            th, res = _solve_shift(table, T, start, tol, pinned)
            if res < best_res:
                best_theta, best_res = th, res
            if res <= tol:
                break
        if best_res <= tol:
            break
    sol = _finish(table, best_theta, gamma, modulus)
    sol.converged = sol.residual <= tol
    if strict and not sol.converged:
        raise InversionError(f"inversion residual {sol.residual:.3e} above tolerance", sol)
    return sol


def solve_for_n(table: PotentialTable, W: Weight, n: int, L: np.ndarray | None = None,
                tol: float = 1e-11) -> InversionSolution:
    """Gap points c_{j,n} for the weighted minimal polynomial of degree n.

    The phase data (gamma, sigma) are solved modulo 2 first.  When no gap points
    realize them modulo 2 (possible for three or more bands), the problem is solved
    modulo 1, which is the single-valuedness condition of the asymptotic formula;
    gamma and sigma are then replaced by the values realized by the returned points.
    ``mod1_residual`` always reports the modulo-1 defect.
    """
    l = table.l
    L = log_moments(table, W) if L is None else np.asarray(L)
    gamma, sigma = gamma_n(table, W, n, L)
    if l == 1:
        return InversionSolution(n, gamma, sigma, np.zeros(0), np.zeros(0, dtype=bool), 0.0,
                                 np.zeros(0), 2)
    t = n * np.asarray(table.omega_inf[: l - 1]) + L
    sol = solve_inversion(table, gamma, 2, tol=tol)
    if not sol.converged:
        sol = solve_inversion(table, np.mod(t, 1.0), 1, tol=tol)
        if not sol.converged:
            raise InversionError(f"inversion failed for n = {n}", sol)
        realized = abel_sum(table, sol.c)
        gamma, _ = reduce_phase(realized)
        sigma = np.mod(np.round(realized - t), 2).astype(int)
        sol.modulus = 1
    sol.n = n
    sol.gamma, sol.sigma = gamma, sigma
    sol.mod1_residual = torus_defect(abel_sum(table, sol.c), t, 1.0)
    return sol


@dataclass
class PeriodicSchedule:
    period: int
    c: np.ndarray  # (period, l-1)
    max_deviation: float
    checked_blocks: int


def gap_point_distance(a: InversionSolution, b: InversionSolution) -> float:
    """max_j |c_j(a) - c_j(b)|, where two points both at gap ends count as equal.

    A gap point at either end of its gap drops out of the asymptotic formulas
    (its factor phi(z, c) is replaced by 1), so which end it sits on carries no
    information.
    """
    if a.c.size == 0:
        return 0.0
    both_ends = np.asarray(a.endpoint_flags) & np.asarray(b.endpoint_flags)
    d = np.where(both_ends, 0.0, np.abs(a.c - b.c))
    return float(np.max(d))


def periodic_schedule(table: PotentialTable, W: Weight, N: int, B_max: int = 10,
                      tol: float = 1e-8) -> PeriodicSchedule:
    """c_{j,b} for b = 0..N-1 and a check that c_{j,b+kN} = c_{j,b} for k <= B_max.

    Points at gap ends are compared with :func:`gap_point_distance`.
    """
    om = np.asarray(table.omega_inf)
    if np.max(np.abs(N * om - np.round(N * om))) > tol:
        raise ValueError(f"harmonic measures {om} are not multiples of 1/{N}")
    L = log_moments(table, W)
    base = [solve_for_n(table, W, b, L) for b in range(N)]
    dev = 0.0
    for k in range(1, B_max + 1):
        for b in range(N):
            dev = max(dev, gap_point_distance(base[b], solve_for_n(table, W, b + k * N, L)))
    if dev > tol:
        raise ValueError(f"schedule is not periodic: deviation {dev:.3e}")
    return PeriodicSchedule(N, np.array([s.c for s in base]), dev, B_max)
