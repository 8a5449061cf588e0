"""Limit objects for FBD-alpha: moment polynomials, g(x), q_alpha and mu_inf.

The scaling constant q_alpha is the positive root of x g(x) = (1-alpha)/alpha
with g(x) = sum_{i>=1} x^(2i-1)/(2i-1)!! = exp(x^2/2) * int_0^x exp(-y^2/2) dy.
The limit measure is

    mu_inf = (alpha/2) delta(-q) + (1-alpha) Phi_q + (alpha/2) delta(q),

with Phi_q the standard Gaussian restricted to [-q, q] and renormalised.

Anything that amplifies rounding by (2k-1)!! (the moment recursion, the
inequality family at the root) is evaluated with mpmath at ``HP_DPS``
digits against a high-precision refinement of q.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import mpmath
import numpy as np

from .lattice import MassState

MAX_K = 30
G_RANGE = 10.0
HP_DPS = 120
MAX_ITER = 200

SQRT2 = math.sqrt(2.0)
SQRT_HALF_PI = math.sqrt(math.pi / 2.0)


class DomainError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


# (2k-1)!! for k = 0..MAX_K, exact integers; (-1)!! = 1
_DFACT = [1]
for _k in range(1, MAX_K + 2):
    _DFACT.append(_DFACT[-1] * (2 * _k - 1))


def double_factorial_odd(k: int) -> int:
    """(2k-1)!! for 0 <= k <= 31."""
    if not 0 <= k <= MAX_K + 1:
        raise ValueError(f"(2k-1)!! tabulated for 0 <= k <= {MAX_K + 1}, got k={k}")
    return _DFACT[k]


def _check_k(k: int) -> None:
    if not 0 <= k <= MAX_K:
        raise ValueError(f"k must lie in [0, {MAX_K}], got {k}")


def poly_P(k: int, ell, alpha):
    """P_k(ell) from P_0 = 1 - alpha, P_k = (2k-1) P_{k-1} - alpha ell^(2k).

    Works on floats or mpmath numbers; pass mpf arguments (inside a
    ``mpmath.workdps`` block) when k is large and ell is near the root.
    """
    _check_k(k)
    p = 1 - alpha
    for j in range(1, k + 1):
        p = (2 * j - 1) * p - alpha * ell ** (2 * j)
    return p


def poly_P_tilde(k: int, ell, alpha):
    """P_k / (2k-1)!! via the closed partial sum 1 - alpha - sum_i alpha ell^(2i)/(2i-1)!!."""
    _check_k(k)
    s = 0
    for i in range(1, k + 1):
        s += ell ** (2 * i) / _DFACT[i]
    return 1 - alpha - alpha * s


def g_series(x: float, terms: int) -> float:
    """Partial sum of sum_{i=1..terms} x^(2i-1)/(2i-1)!!."""
    if terms < 1:
        raise ValueError("terms must be >= 1")
    term = x
    total = x
    x2 = x * x
    for i in range(2, terms + 1):
        term *= x2 / (2 * i - 1)
        total += term
    return total


def g_closed(x: float) -> float:
    """exp(x^2/2) * int_0^x exp(-y^2/2) dy, for |x| <= 10."""
    if not abs(x) <= G_RANGE:
        raise DomainError(f"g_closed evaluated outside |x| <= {G_RANGE}: {x}")
    return math.exp(0.5 * x * x) * SQRT_HALF_PI * math.erf(x / SQRT2)


def g_prime(x: float) -> float:
    return 1.0 + x * g_closed(x)


def g_mp(x):
    return mpmath.exp(x * x / 2) * mpmath.sqrt(mpmath.pi / 2) * mpmath.erf(x / mpmath.sqrt(2))


def gaussian_mass(q: float) -> float:
    """Phi([-q, q]) for the standard Gaussian."""
    return math.erf(q / SQRT2)


@dataclass(frozen=True)
class LimitMeasure:
    alpha: float
    q: float

    @cached_property
    def q_mp(self) -> mpmath.mpf:
        """q refined by Newton's method to ``HP_DPS`` digits."""
        return _refine_q(self.alpha, self.q)

    @property
    def target(self) -> float:
        return (1.0 - self.alpha) / self.alpha

    def key_residual(self) -> float:
        """q g(q) - (1-alpha)/alpha."""
        return self.q * g_closed(self.q) - self.target

    def gaussian_residual(self) -> float:
        """(alpha/2) q - (1-alpha) e^{-q^2/2} / (sqrt(2 pi) Phi([-q, q]))."""
        a, q = self.alpha, self.q
        return 0.5 * a * q - (1.0 - a) * math.exp(-0.5 * q * q) / (math.sqrt(2 * math.pi) * gaussian_mass(q))

    def cdf(self, x: float) -> float:
        return limit_cdf(x, self)


def _refine_q(alpha: float, q0: float) -> mpmath.mpf:
    with mpmath.workdps(HP_DPS + 10):
        a = mpmath.mpf(alpha)
        target = (1 - a) / a
        x = mpmath.mpf(q0)
        tol = mpmath.mpf(10) ** (-HP_DPS)
        for _ in range(MAX_ITER):
            g = g_mp(x)
            h = x * g - target
            dx = h / (g + x * (1 + x * g))
            x -= dx
            if abs(dx) <= tol * x:
                break
        else:
            raise ConvergenceError("high-precision refinement of q did not converge")
    return x


def solve_q(alpha: float, tol: float = 1e-12) -> LimitMeasure:
    """Root of x g(x) = (1-alpha)/alpha by bracketing, bisection and Newton polish."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if tol < 1e-14:
        raise ValueError("tol must be >= 1e-14")
    target = (1.0 - alpha) / alpha

    def h(x):
        return x * g_closed(x) - target

    # bracket clipped to the domain of g_closed
    lo, hi = 0.0, min(2.0 * math.sqrt(target) + 1.0, G_RANGE)
    it = 0
    while h(hi) <= 0.0:
        if hi >= G_RANGE:
            raise ConvergenceError(f"q for alpha={alpha} lies beyond |x| <= {G_RANGE}")
        lo, hi = hi, min(2.0 * hi, G_RANGE)
        it += 1
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if h(mid) > 0.0:
            hi = mid
        else:
            lo = mid
        it += 1
        if it > MAX_ITER:
            raise ConvergenceError(f"bisection cap hit for alpha={alpha}")
    x = 0.5 * (lo + hi)
    for _ in range(2):
        g = g_closed(x)
        x -= (x * g - target) / (g + x * (1.0 + x * g))
    if not abs(h(x)) <= tol:
        raise ConvergenceError(f"|q g(q) - target| = {abs(h(x))!r} > tol={tol} for alpha={alpha}")
    return LimitMeasure(alpha, x)


def trunc_gauss_moment(k: int, lm: LimitMeasure) -> float:
    """2k-th moment of (1-alpha) Phi_q via m_k = (2k-1) m_{k-1} - alpha q^(2k)."""
    _check_k(k)
    with mpmath.workdps(HP_DPS):
        return float(poly_P(k, lm.q_mp, mpmath.mpf(lm.alpha)))


@dataclass(frozen=True)
class InequalityRow:
    k: int
    P: float
    lower_margin: float
    upper_margin: float

    @property
    def passed(self) -> bool:
        return self.lower_margin >= -MARGIN_TOL and self.upper_margin >= -MARGIN_TOL


MARGIN_TOL = 1e-10


@dataclass(frozen=True)
class InequalityReport:
    alpha: float
    ell: float
    rows: list[InequalityRow]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list[int]:
        return [r.k for r in self.rows if not r.passed]


def check_inequalities(lm: LimitMeasure, K: int, ell=None) -> InequalityReport:
    """Margins of 0 <= P_k(ell) <= (1-alpha) ell^(2k) for k = 0..K.

    ``ell`` defaults to the high-precision root; any float or mpf may be
    supplied instead.  Margins are (P_k, (1-alpha) ell^(2k) - P_k).
    """
    _check_k(K)
    rows = []
    with mpmath.workdps(HP_DPS):
        a = mpmath.mpf(lm.alpha)
        l = lm.q_mp if ell is None else mpmath.mpf(ell)
        p = 1 - a
        for k in range(K + 1):
            if k:
                p = (2 * k - 1) * p - a * l ** (2 * k)
            upper = (1 - a) * l ** (2 * k) - p
            rows.append(InequalityRow(k, float(p), float(p), float(upper)))
        ell_out = float(l)
    return InequalityReport(lm.alpha, ell_out, rows)


@dataclass(frozen=True)
class GrowthReport:
    c: float
    moments: list[float]
    bounds: list[float]

    @property
    def passed(self) -> bool:
        return all(abs(m) <= b for m, b in zip(self.moments, self.bounds))


def truncated_moment(j: int, lm: LimitMeasure) -> float:
    """j-th moment of the probability measure Phi_q (zero for odd j)."""
    if j % 2:
        return 0.0
    return trunc_gauss_moment(j // 2, lm) / (1.0 - lm.alpha)


def moment_growth_check(lm: LimitMeasure, K: int) -> GrowthReport:
    """Check |E_{Phi_q} X^j| <= c^j j! for j = 0..K with c = max(1, q^2)."""
    if not 0 <= K <= MAX_K:
        raise ValueError(f"K must lie in [0, {MAX_K}]")
    c = max(1.0, lm.q * lm.q)
    moments = [truncated_moment(j, lm) for j in range(K + 1)]
    bounds = [c**j * math.factorial(j) for j in range(K + 1)]
    return GrowthReport(c, moments, bounds)


def limit_cdf(x: float, lm: LimitMeasure) -> float:
    """Right-continuous CDF of mu_inf(alpha)."""
    a, q = lm.alpha, lm.q
    if x < -q:
        return 0.0
    if x >= q:
        return 1.0
    inner = (math.erf(x / SQRT2) + math.erf(q / SQRT2)) / (2.0 * gaussian_mass(q))
    return 0.5 * a + (1.0 - a) * inner


def limit_cdf_left(x: float, lm: LimitMeasure) -> float:
    """Left limit of the CDF of mu_inf(alpha) at x."""
    a, q = lm.alpha, lm.q
    if x <= -q:
        return 0.0
    if x > q:
        return 1.0
    if x == q:
        return 1.0 - 0.5 * a
    return limit_cdf(x, lm)


def rescaled_atoms(state: MassState) -> tuple[np.ndarray, np.ndarray]:
    """Atom locations x / sqrt(t) and masses of the rescaled state."""
    if state.t < 1:
        raise ValueError("rescaling needs t >= 1")
    sites, masses = state.full()
    keep = masses > 0.0
    return sites[keep] / math.sqrt(state.t), masses[keep]


def levy_distance_atoms(locs: np.ndarray, masses: np.ndarray, lm: LimitMeasure, tol: float = 1e-12) -> float:
    """Levy distance between a discrete measure and mu_inf(alpha).

    For a step CDF F with jumps at a_j and a monotone G, the condition
    F(x - e) - e <= G(x) <= F(x + e) + e for all x reduces to the finite set
    G((a_j - e)-) <= F(a_j-) + e and G(a_j + e) >= F(a_j) - e.
    """
    order = np.argsort(locs, kind="stable")
    a = np.asarray(locs, dtype=float)[order]
    cum = np.cumsum(np.asarray(masses, dtype=float)[order])
    before = np.concatenate([[0.0], cum[:-1]])

    def ok(e: float) -> bool:
        for aj, fb, fa in zip(a, before, cum):
            if limit_cdf_left(aj - e, lm) > fb + e:
                return False
            if limit_cdf(aj + e, lm) < fa - e:
                return False
        return True

    lo, hi = 0.0, 1.0
    if ok(0.0):
        return 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def levy_distance(state: MassState, lm: LimitMeasure) -> float:
    """Levy distance between the sqrt(t)-rescaled state and mu_inf(alpha)."""
    locs, masses = rescaled_atoms(state)
    return levy_distance_atoms(locs, masses, lm)


def kolmogorov_distance(state: MassState, lm: LimitMeasure) -> float:
    """Sup-distance between CDFs; secondary diagnostic only (atoms dominate it)."""
    locs, masses = rescaled_atoms(state)
    cum = np.cumsum(masses)
    before = np.concatenate([[0.0], cum[:-1]])
    worst = 0.0
    for x, fb, fa in zip(locs, before, cum):
        worst = max(worst, abs(limit_cdf_left(x, lm) - fb), abs(limit_cdf(x, lm) - fa))
    return worst
