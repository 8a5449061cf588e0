import math
from fractions import Fraction

import numpy as np
import pytest

import exact_fbd
from fbd.checks import moment_increment
from fbd.engine import (
    free_moment,
    frozen_moment,
    geometric_schedule,
    linear_schedule,
    moment,
    run_fbd,
)
from fbd.lattice import MassState, freeze_split

MU1 = {-1: 0.25, 0: 0.5, 1: 0.25}
MU3 = {-2: 0.125, -1: 0.25, 0: 0.25, 1: 0.25, 2: 0.125}


def test_run_fbd_first_step():
    row = run_fbd(0.5, 1, [1]).rows[0]
    assert (row.t, row.beta, row.m2, row.frozen_mass) == (1, 1, 0.5, 0.5)


def test_run_fbd_three_steps():
    tr = run_fbd(0.5, 3, [3])
    assert tr.rows[0].m2 == 1.5
    assert tr.final_state.t == 3
    assert tr.final_state.half.tolist() == [0.25, 0.25, 0.125]


def test_moment_examples():
    d = MassState.delta(0.5)
    assert moment(d, 0) == 1.0
    for k in (2, 4, 12):
        assert moment(d, k) == 0.0
    assert moment(MassState.from_full(0.5, 3, MU3), 2) == 1.5


def test_moment_rejects_odd_and_large_orders():
    d = MassState.delta(0.5)
    with pytest.raises(ValueError):
        moment(d, 3)
    with pytest.raises(ValueError):
        moment(d, 14)


def test_free_moment_examples():
    assert free_moment(freeze_split(MassState.delta(0.5)), 0) == 0.5
    assert free_moment(freeze_split(MassState.from_full(0.5, 1, MU1)), 2) == 0.0
    assert free_moment(freeze_split(MassState.from_full(0.5, 3, MU3)), 2) == 0.25


@pytest.mark.parametrize("alpha", [Fraction(1, 2), Fraction(1, 5), Fraction(7, 8)])
def test_moments_match_exact_oracle(alpha):
    exact = exact_fbd.trajectory(alpha, 30)
    tr = run_fbd(float(alpha), 30, list(range(31)), snapshot_times=range(31))
    for t, mu in enumerate(exact):
        state = tr.snapshot_at(t)
        for k in (0, 2, 4, 6):
            want = float(sum(m * x**k for x, m in mu.items()))
            assert moment(state, k) == pytest.approx(want, rel=1e-14, abs=1e-15)
        assert tr.row_at(t).m2 == pytest.approx(t * (1 - float(alpha)), rel=1e-14, abs=1e-15)


def test_exact_second_moment_identity_rational():
    # with exact arithmetic M_2(t) = t(1 - alpha) holds with equality
    alpha = Fraction(1, 3)
    for t, mu in enumerate(exact_fbd.trajectory(alpha, 25)):
        assert sum(m * x * x for x, m in mu.items()) == t * (1 - alpha)


def test_moment_change_identity_stepwise():
    states = run_fbd(0.3, 400, [400], snapshot_times=range(401)).snapshots
    for (t, s), (_, s_next) in zip(states, states[1:]):
        sp = freeze_split(s)
        for k in (1, 2, 3):
            inc = moment(s_next, 2 * k) - moment(s, 2 * k)
            assert inc == pytest.approx(moment_increment(sp, k), rel=1e-11)


def test_telescoped_identity():
    alpha = 0.5
    sums = {k: [] for k in (1, 2, 3)}
    got = {}

    def obs(sp):
        if sp.t in (64, 512, 2000):
            got[sp.t] = {k: (moment(sp.state, 2 * k), math.fsum(sums[k])) for k in sums}
        for k in sums:
            sums[k].append(moment_increment(sp, k))

    run_fbd(alpha, 2000, observer=obs)
    for t, per_k in got.items():
        for k, (lhs, rhs) in per_k.items():
            assert lhs == pytest.approx(rhs, rel=1e-8)


def test_determinism_bit_identical():
    a = run_fbd(0.37, 3000)
    b = run_fbd(0.37, 3000)
    assert a.rows == b.rows
    assert np.array_equal(a.final_state.half, b.final_state.half)


def test_scaled_fourth_moment_is_cauchy():
    ts = [250, 500, 1000, 2000, 4000, 8000]
    rows = run_fbd(0.5, ts[-1], ts).rows
    scaled = [r.m4 / r.t**2 for r in rows]
    gaps = [abs(b - a) for a, b in zip(scaled, scaled[1:])]
    assert all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))


def test_frozen_moments_scale_like_two_atoms():
    from fbd.analysis import solve_q

    q = solve_q(0.5).q
    st = run_fbd(0.5, 20000, [20000]).final_state
    sp = freeze_split(st)
    t = st.t
    for k in (1, 2, 3):
        assert frozen_moment(sp, 2 * k) / t**k == pytest.approx(0.5 * q ** (2 * k), rel=0.02)


def test_profile_has_two_boundary_spikes():
    st = run_fbd(0.5, 25000, [25000]).final_state
    sp = freeze_split(st)
    b = sp.beta
    # frozen quarter sits on beta, beta+1 and dwarfs the bulk
    assert st.mass_at(b) + st.mass_at(b + 1) >= 0.25 - 1e-12
    assert max(st.mass_at(b), st.mass_at(b + 1)) > 20 * st.half[: b - 1].max()
    # bulk is flat-topped: the centre differs little from a quarter of the way out
    assert st.half[b // 4] / st.half[0] > 0.9


def test_schedules():
    assert geometric_schedule(10) == [1, 2, 4, 8, 10]
    assert geometric_schedule(8) == [1, 2, 4, 8]
    assert linear_schedule(10, 3) == [3, 6, 9, 10]


def test_bad_arguments():
    with pytest.raises(ValueError):
        run_fbd(1.0, 5)
    with pytest.raises(ValueError):
        run_fbd(0.5, 0)
    with pytest.raises(ValueError):
        run_fbd(0.5, 5, [3, 2])
    with pytest.raises(ValueError):
        run_fbd(0.5, 5, [6])
