"""Invariant suite: runs FBD-alpha and audits every step, plus analytic cross-checks."""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

from . import analysis, oracles
from .engine import free_moment, boundary_bounds_hold, moment
from .lattice import InvalidState, MassState, freeze_split, heat_step

MOMENT_ORDERS = (1, 2, 3)  # k in M_{2k}


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def moment_increment(split, k: int) -> float:
    """sum_{i=1..k} C(2k, 2k-2i) M^nu_{2k-2i}: the one-step change of M_{2k}."""
    return math.fsum(comb(2 * k, 2 * k - 2 * i) * free_moment(split, 2 * k - 2 * i) for i in range(1, k + 1))


class _Worst:
    def __init__(self):
        self.value = 0.0
        self.where = None

    def update(self, v: float, where) -> None:
        if self.where is None or v > self.value:
            self.value, self.where = v, where


def lattice_checks(alpha: float, steps: int, inject_fault: bool = False) -> list[CheckResult]:
    """Step-by-step audit of one FBD-alpha run from delta(0).

    ``inject_fault`` perturbs one mass entry halfway through; it exists to
    prove the suite can fail.
    """
    mass_step = _Worst()
    mass_abs = _Worst()
    m2 = _Worst()
    change = _Worst()
    telescoped = _Worst()
    bounds_fail: list[int] = []
    support_fail: list[int] = []
    monotone_fail: list[int] = []
    frozen_fail: list[int] = []
    invalid: list[str] = []

    sums = {k: [] for k in MOMENT_ORDERS}  # running sums of increments (compensated)
    state = MassState.delta(alpha)
    prev_total = state.total
    prev_beta = 0
    prev_moments = None
    fault_at = max(1, steps // 2)

    for t in range(steps + 1):
        try:
            split = freeze_split(state)
        except InvalidState as exc:
            invalid.append(str(exc))
            break
        total = state.total
        if t:
            mass_step.update(abs(total - prev_total), t)
        mass_abs.update(abs(total - 1.0) / (t + 1), t)
        prev_total = total
        m2.update(abs(moment(state, 2) - t * (1 - alpha)) / max(1, t), t)
        if t >= 1 and not boundary_bounds_hold(split.beta, t, alpha):
            bounds_fail.append(t)
        if state.max_site >= split.beta + 2:
            support_fail.append(t)
        if split.beta < prev_beta:
            monotone_fail.append(t)
        prev_beta = split.beta
        if abs(split.frozen_total - alpha) > 1e-12 or abs(split.free_total - (1 - alpha)) > 1e-12:
            frozen_fail.append(t)

        moments = {k: moment(state, 2 * k) for k in MOMENT_ORDERS}
        if prev_moments is not None:
            for k in MOMENT_ORDERS:
                want = prev_increments[k]
                got = moments[k] - prev_moments[k]
                change.update(abs(got - want) / max(abs(want), 1e-300), (t, k))
        if t and (t & (t - 1) == 0 or t == steps):
            for k in MOMENT_ORDERS:
                rhs = math.fsum(sums[k])
                telescoped.update(abs(moments[k] - rhs) / max(abs(moments[k]), 1e-300), (t, k))
        prev_moments = moments
        prev_increments = {k: moment_increment(split, k) for k in MOMENT_ORDERS}
        for k in MOMENT_ORDERS:
            sums[k].append(prev_increments[k])

        if t == steps:
            break
        state = heat_step(split)
        if inject_fault and state.t == fault_at:
            half = state.half.copy()
            half[0] += 1e-9
            state = MassState(alpha, state.t, half)

    def fmt(ts):
        return f"first failures at t={ts[:5]}" if ts else ""

    out = [
        CheckResult("no_invalid_state", not invalid, invalid[0] if invalid else ""),
        CheckResult("mass_conservation_step", mass_step.value <= 1e-15 and mass_abs.value <= 1e-12,
                    f"max |dmass|={mass_step.value:.3g} (t={mass_step.where}); max |mass-1|/(t+1)={mass_abs.value:.3g}"),
        CheckResult("second_moment_identity", m2.value <= 1e-10,
                    f"max |M2 - t(1-a)|/t = {m2.value:.3g} at t={m2.where}"),
        CheckResult("boundary_bounds", not bounds_fail, fmt(bounds_fail)),
        CheckResult("support", not support_fail, fmt(support_fail)),
        CheckResult("boundary_monotone", not monotone_fail, fmt(monotone_fail)),
        CheckResult("frozen_free_split", not frozen_fail, fmt(frozen_fail)),
        CheckResult("moment_change_identity", change.value <= 1e-9,
                    f"max rel err {change.value:.3g} at (t, k)={change.where}"),
        CheckResult("telescoped_moments", telescoped.value <= 1e-8,
                    f"max rel err {telescoped.value:.3g} at (t, k)={telescoped.where}"),
    ]
    return out


def analytic_checks(alpha: float, K: int = 20) -> list[CheckResult]:
    """Fixed point, series/closed-form/quadrature agreement, inequality family, growth bound."""
    out = []
    try:
        lm = analysis.solve_q(alpha)
    except analysis.ConvergenceError as exc:
        return [CheckResult("solve_q", False, str(exc))]
    kr, gr = lm.key_residual(), lm.gaussian_residual()
    out.append(CheckResult("fixed_point_residuals", abs(kr) <= 1e-12 and abs(gr) <= 1e-9,
                           f"q={lm.q:.15g} key={kr:.3g} gaussian={gr:.3g}"))
    xs = [0.25 * i for i in range(13)]
    series_err = max(abs(analysis.g_series(x, 60) - analysis.g_closed(x)) for x in xs)
    out.append(CheckResult("g_series_vs_closed", series_err <= 1e-12, f"max abs err {series_err:.3g}"))
    quad_err = max(abs(oracles.g_quad(x) - analysis.g_closed(x)) / analysis.g_closed(x) for x in xs[1:])
    out.append(CheckResult("g_closed_vs_quadrature", quad_err <= 1e-12, f"max rel err {quad_err:.3g}"))
    tg_err = max(
        abs(analysis.trunc_gauss_moment(k, lm) / oracles.trunc_moment_quad(k, lm.q, alpha) - 1.0) for k in range(11)
    )
    out.append(CheckResult("trunc_gauss_vs_quadrature", tg_err <= 1e-10, f"max rel err {tg_err:.3g}"))
    ineq = analysis.check_inequalities(lm, K)
    worst = min(min(r.lower_margin, r.upper_margin) for r in ineq.rows)
    out.append(CheckResult("inequality_family", ineq.passed, f"K={K} min margin {worst:.3g}"))
    growth = analysis.moment_growth_check(lm, K)
    out.append(CheckResult("moment_growth", growth.passed, f"c={growth.c:.6g}"))
    return out


def run_all(alpha: float, steps: int, inject_fault: bool = False) -> list[CheckResult]:
    return lattice_checks(alpha, steps, inject_fault) + analytic_checks(alpha)
