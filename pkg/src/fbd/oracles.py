"""Independent numerical oracles used to cross-check the analytic routines.

Nothing here calls into ``analysis``; integrals are done by adaptive
Simpson quadrature on the raw integrands.
"""
from __future__ import annotations

import math


def adaptive_simpson(f, a: float, b: float, rtol: float = 1e-15, max_depth: int = 40) -> float:
    """Integral of f over [a, b] by adaptive Simpson with Richardson correction.

    The absolute tolerance is ``rtol`` times a 64-panel composite Simpson
    estimate of the integral, so tiny integrals are resolved relatively.
    """

    def simpson(fa, fm, fb, h):
        return h * (fa + 4.0 * fm + fb) / 6.0

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        delta = left + right - whole
        # stop once the correction is at roundoff level for this panel
        if depth <= 0 or abs(delta) <= 15.0 * tol or abs(delta) <= 2e-15 * abs(left + right):
            return left + right + delta / 15.0
        return rec(a, m, fa, flm, fm, left, tol / 2, depth - 1) + rec(m, b, fm, frm, fb, right, tol / 2, depth - 1)

    n = 64
    xs = [a + (b - a) * i / (2 * n) for i in range(2 * n + 1)]
    ys = [abs(f(x)) for x in xs]
    scale = (b - a) / (6 * n) * (ys[0] + ys[-1] + 4 * sum(ys[1::2]) + 2 * sum(ys[2:-1:2]))
    tol = rtol * scale if scale > 0 else rtol
    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, max_depth)


def gaussian_interval_mass(q: float) -> float:
    """P(|Z| <= q) for a standard normal Z, by quadrature of the density."""
    c = 1.0 / math.sqrt(2.0 * math.pi)
    return 2.0 * adaptive_simpson(lambda x: c * math.exp(-0.5 * x * x), 0.0, q)


def trunc_moment_quad(k: int, q: float, alpha: float) -> float:
    """(1-alpha) int_{-q}^{q} x^(2k) e^{-x^2/2} dx / (sqrt(2 pi) Phi([-q, q]))."""
    num = 2.0 * adaptive_simpson(lambda x: x ** (2 * k) * math.exp(-0.5 * x * x), 0.0, q)
    den = math.sqrt(2.0 * math.pi) * gaussian_interval_mass(q)
    return (1.0 - alpha) * num / den


def g_quad(x: float) -> float:
    """exp(x^2/2) int_0^x exp(-y^2/2) dy by quadrature."""
    return math.exp(0.5 * x * x) * adaptive_simpson(lambda y: math.exp(-0.5 * y * y), 0.0, x)
