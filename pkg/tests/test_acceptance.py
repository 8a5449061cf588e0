"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the summary block at the end
of the session lists every criterion with the measured quantity.
"""
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from fbd import cli, oracles
from fbd.analysis import (
    check_inequalities,
    g_closed,
    g_series,
    poly_P,
    solve_q,
    trunc_gauss_moment,
)
from fbd.checks import moment_increment
from fbd.engine import boundary_bounds_hold, moment, run_fbd
from fbd.fbd2d import freeze_split_2d, run_fbd2d, write_matrix_csv
from fbd.frw import run_trials

pytestmark = pytest.mark.slow

T_MAX = 100_000
ALPHAS = (0.25, 0.5, 0.75)


def record(n, name, passed, detail):
    ACCEPTANCE_LINES.append(f"[{n:2d}] {name}: {'PASS' if passed else 'FAIL'}  {detail}")
    assert passed, detail


@pytest.fixture(scope="module")
def long_runs():
    """One full run per alpha, auditing every step up to T_MAX."""
    out = {}
    for alpha in ALPHAS:
        audit = {"m2": 0.0, "bounds": [], "support": [], "beta_drop": [], "prev_beta": 0}

        def obs(sp, audit=audit, alpha=alpha):
            t, st = sp.t, sp.state
            audit["m2"] = max(audit["m2"], abs(moment(st, 2) - t * (1 - alpha)) / max(t, 1))
            if t >= 1 and not boundary_bounds_hold(sp.beta, t, alpha):
                audit["bounds"].append(t)
            if st.max_site > sp.beta + 1:
                audit["support"].append(t)
            if sp.beta < audit["prev_beta"]:
                audit["beta_drop"].append(t)
            audit["prev_beta"] = sp.beta

        start = time.perf_counter()
        tr = run_fbd(alpha, T_MAX, [1000, T_MAX], observer=obs, validate=False)
        audit["seconds"] = time.perf_counter() - start
        out[alpha] = (tr, audit)
    return out


def test_01_fixed_point():
    lm = solve_q(0.5, 1e-12)
    timings = []
    for _ in range(50):
        s = time.perf_counter()
        solve_q(0.5, 1e-12)
        timings.append(time.perf_counter() - s)
    best = min(timings)
    ok = abs(lm.q - 0.878) <= 2e-3 and abs(lm.key_residual()) <= 1e-9 and abs(lm.gaussian_residual()) <= 1e-9
    record(1, "fixed point q_0.5", ok and best < 1e-3,
           f"q={lm.q:.12f} key_res={lm.key_residual():.1e} gauss_res={lm.gaussian_residual():.1e} "
           f"time={best * 1e3:.3f}ms")


def test_02_exact_second_moment(long_runs):
    worst = max(a["m2"] for _, a in long_runs.values())
    secs = sum(a["seconds"] for _, a in long_runs.values())
    record(2, "exact second moment", worst <= 1e-8,
           f"max |M2 - t(1-a)|/t = {worst:.2e} over t<=1e5, a in {ALPHAS} ({secs:.1f}s total)")


def test_03_boundary_bounds(long_runs):
    bad = {a: au["bounds"][:3] for a, (_, au) in long_runs.items() if au["bounds"]}
    record(3, "boundary bounds every t<=1e5", not bad, f"violations: {bad or 'none'}")


def test_04_support(long_runs):
    bad = {a: (au["support"][:3], au["beta_drop"][:3]) for a, (_, au) in long_runs.items()
           if au["support"] or au["beta_drop"]}
    record(4, "support within beta+1, beta monotone", not bad, f"violations: {bad or 'none'}")


def test_05_boundary_convergence(long_runs):
    q = solve_q(0.5).q
    tr, _ = long_runs[0.5]
    dev = {t: abs(tr.row_at(t).beta_scaled - q) for t in (1000, T_MAX)}
    record(5, "beta_t/sqrt(t) -> q", dev[T_MAX] <= 0.02 and dev[T_MAX] < dev[1000],
           f"dev(1e3)={dev[1000]:.5f} dev(1e5)={dev[T_MAX]:.5f}")


def test_06_moment_change_identity():
    worst = [0.0]
    prev = {}

    def obs(sp):
        m = {k: moment(sp.state, 2 * k) for k in (1, 2, 3)}
        if prev:
            for k in (1, 2, 3):
                want = prev["inc"][k]
                worst[0] = max(worst[0], abs((m[k] - prev["m"][k]) - want) / abs(want))
        prev["m"] = m
        prev["inc"] = {k: moment_increment(sp, k) for k in (1, 2, 3)}

    run_fbd(0.5, 10_000, [10_000], observer=obs, validate=False)
    record(6, "moment-change identity k=1,2,3", worst[0] <= 1e-9, f"max rel err={worst[0]:.2e} over t<=1e4")


def test_07_scaled_fourth_moment(long_runs):
    lm = solve_q(0.5)
    target = poly_P(2, lm.q, 0.5) + 0.5 * lm.q**4
    tr, _ = long_runs[0.5]
    err = {t: abs(tr.row_at(t).m4 / t**2 - target) for t in (1000, T_MAX)}
    record(7, "M4/t^2 limit", err[T_MAX] < 0.02 and err[T_MAX] < err[1000],
           f"target={target:.10f} err(1e3)={err[1000]:.2e} err(1e5)={err[T_MAX]:.2e}")


def test_08_truncated_gaussian_oracle():
    worst = 0.0
    for alpha in (0.1, 0.5, 0.9):
        lm = solve_q(alpha)
        for k in range(11):
            want = oracles.trunc_moment_quad(k, lm.q, alpha)
            worst = max(worst, abs(trunc_gauss_moment(k, lm) - want) / abs(want))
    record(8, "truncated Gaussian moments vs quadrature", worst <= 1e-10, f"max rel err={worst:.2e}")


def test_09_inequality_family():
    lm = solve_q(0.5)
    at_root = check_inequalities(lm, 20)
    worst = min(min(r.lower_margin, r.upper_margin) for r in at_root.rows)
    beyond = check_inequalities(lm, 30, ell=1.1 * lm.q_mp)
    first_fail = beyond.failures()[0] if beyond.failures() else None
    ok = at_root.passed and worst >= -1e-10 and first_fail is not None
    record(9, "inequality family", ok, f"min margin at q (k<=20)={worst:.2e}; 1.1q first fails at k={first_fail}")


def test_10_series_identities():
    xs = [0.25 * i for i in range(1, 13)]
    series_err = max(abs(g_series(x, 60) - g_closed(x)) for x in xs)
    ratios = []
    for x in (0.5, 1.0, 2.0):
        res = []
        for h in (1e-2, 5e-3):
            fd = (g_closed(x + h) - g_closed(x - h)) / (2 * h)
            res.append(abs(fd - (1 + x * g_closed(x))))
        ratios.append(res[0] / res[1])
    ode_ok = all(abs(r - 4.0) < 0.2 for r in ratios)
    record(10, "series and ODE for g", series_err <= 1e-12 and ode_ok,
           f"max|series-closed|={series_err:.1e} residual ratios h/(h/2)={[round(r, 3) for r in ratios]}")


def test_11_frw_matches_fbd():
    n, trials, steps = 100_000, 50, 100
    start = time.perf_counter()
    sites, grid = run_trials(n, 0.5, steps, trials, master_seed=7)
    elapsed = time.perf_counter() - start
    frac = grid / n
    mean = frac.mean(axis=0)
    se = frac.std(axis=0, ddof=1) / math.sqrt(trials)
    st = run_fbd(0.5, steps, [steps]).final_state
    mu = np.array([st.mass_at(int(x)) for x in sites])
    tv = 0.5 * np.abs(mean - mu).sum()
    noise = 0.5 * se.sum()
    record(11, "FRW vs FBD total variation", tv <= 0.02 and elapsed < 60,
           f"TV={tv:.4f} (3x MC noise scale={3 * noise:.4f}) runtime={elapsed:.1f}s")


def test_12_cli_determinism(tmp_path):
    p = [tmp_path / f"{i}.csv" for i in range(5)]
    cli.main(["fbd", "--alpha", "0.5", "--steps", "2000", "-o", str(p[0])])
    cli.main(["fbd", "--alpha", "0.5", "--steps", "2000", "-o", str(p[1])])
    base = ["frw", "--n", "5000", "--steps", "50", "--trials", "6", "--seed", "11"]
    cli.main(base + ["--jobs", "1", "-o", str(p[2])])
    cli.main(base + ["--jobs", "1", "-o", str(p[3])])
    cli.main(base + ["--jobs", "3", "-o", str(p[4])])
    same_fbd = p[0].read_bytes() == p[1].read_bytes()
    same_frw = p[2].read_bytes() == p[3].read_bytes() == p[4].read_bytes()
    record(12, "byte-identical CLI reruns", same_fbd and same_frw,
           f"fbd identical={same_fbd} frw identical across jobs 1,1,3={same_frw}")


def test_13_two_dimensional(tmp_path):
    alpha = 0.5
    worst = {"mass": 0.0, "m2": 0.0, "asym": 0, "frozen": 0.0}

    def obs(g):
        worst["mass"] = max(worst["mass"], abs(g.total() - 1.0))
        if g.t:
            worst["m2"] = max(worst["m2"], abs(g.radial_second_moment() - g.t * (1 - alpha)) / g.t)
        worst["asym"] += not g.is_symmetric()
        _, frozen = freeze_split_2d(g)
        worst["frozen"] = max(worst["frozen"], abs(frozen.sum() - alpha))

    grid, free = run_fbd2d(alpha, 1000, observer=obs)
    heat = tmp_path / "heat.csv"
    write_matrix_csv(heat, free)
    ok = worst["mass"] <= 1e-10 and worst["m2"] <= 1e-8 and worst["asym"] == 0 and worst["frozen"] <= 1e-12 and heat.stat().st_size > 0
    record(13, "2D mass, symmetry, second moment", ok,
           f"max mass err={worst['mass']:.1e} max M2 err/t={worst['m2']:.1e} asymmetric steps={worst['asym']} "
           f"max |frozen-alpha|={worst['frozen']:.1e} "
           f"radius={grid.radius}")
