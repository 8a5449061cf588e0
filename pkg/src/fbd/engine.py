"""Evolution of FBD-alpha from a point mass, with per-sample diagnostics."""
from __future__ import annotations

import logging
import math
from fractions import Fraction
from functools import lru_cache
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .lattice import FrozenSplit, InvalidState, MassState, freeze_split, heat_step, half_total

logger = logging.getLogger(__name__)

MAX_MOMENT_ORDER = 12


def _half_moment(half: np.ndarray, k: int) -> float:
    if k < 0 or k % 2:
        raise ValueError(f"only even nonnegative moment orders are supported, got {k}")
    if k > MAX_MOMENT_ORDER:
        raise ValueError(f"moment order {k} exceeds supported range (<= {MAX_MOMENT_ORDER})")
    if k == 0:
        return half_total(half)
    x = np.arange(1, half.size, dtype=np.float64)
    # odd moments vanish by symmetry; site 0 contributes nothing for k >= 2
    return 2.0 * math.fsum(half[1:] * x**k)


def moment(state: MassState, k: int) -> float:
    """Even moment sum_x mu_t(x) x^k, with compensated accumulation."""
    return _half_moment(state.half, k)


def free_moment(split: FrozenSplit, k: int) -> float:
    """Even moment of the free part of a split."""
    return _half_moment(split.free, k)


def frozen_moment(split: FrozenSplit, k: int) -> float:
    return _half_moment(split.frozen, k)


@dataclass(frozen=True)
class DiagnosticsRow:
    t: int
    beta: int
    beta_scaled: float
    m2: float
    m4: float
    m6: float
    m2_residual: float
    mass_residual: float
    frozen_mass: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class Trajectory:
    alpha: float
    rows: list[DiagnosticsRow]
    final_state: MassState
    snapshots: list[tuple[int, MassState]] = field(default_factory=list)

    def row_at(self, t: int) -> DiagnosticsRow:
        for r in self.rows:
            if r.t == t:
                return r
        raise KeyError(t)

    def snapshot_at(self, t: int) -> MassState:
        for s, st in self.snapshots:
            if s == t:
                return st
        raise KeyError(t)


def diagnostics(split: FrozenSplit) -> DiagnosticsRow:
    state = split.state
    t, alpha = state.t, state.alpha
    m2 = moment(state, 2)
    return DiagnosticsRow(
        t=t,
        beta=split.beta,
        beta_scaled=split.beta / math.sqrt(t) if t > 0 else 0.0,
        m2=m2,
        m4=moment(state, 4),
        m6=moment(state, 6),
        m2_residual=m2 - t * (1.0 - alpha),
        mass_residual=state.total - 1.0,
        frozen_mass=split.frozen_total,
    )


def check_row(row: DiagnosticsRow, alpha: float) -> list[str]:
    """Names of the row invariants that fail (empty when all hold)."""
    bad = []
    t = row.t
    if abs(row.m2_residual) > 1e-10 * max(1, t):
        bad.append("m2_identity")
    if abs(row.mass_residual) > 1e-12 * (t + 1):
        bad.append("mass_conservation")
    if abs(row.frozen_mass - alpha) > 1e-12:
        bad.append("frozen_mass")
    if t >= 1:
        if not boundary_bounds_hold(row.beta, t, alpha):
            bad.append("boundary_bounds")
    return bad


@lru_cache(maxsize=64)
def _decimal_ratio(alpha: float) -> tuple[int, int]:
    f = Fraction(repr(alpha))
    return f.numerator, f.denominator


def boundary_bounds_hold(beta: int, t: int, alpha: float) -> bool:
    """sqrt(t(1-alpha)) - 1 < beta <= sqrt(t(1-alpha)/alpha), in squared form.

    Evaluated in integers on the decimal value of alpha: the upper bound is
    attained with equality (e.g. alpha=0.8, t=4, beta=1) and float rounding of
    1 - alpha would otherwise flip such ties.
    """
    p, q = _decimal_ratio(alpha)
    drift = t * (q - p)  # q * t(1 - alpha)
    return q * (beta + 1) ** 2 > drift and p * beta * beta <= drift


def evolve(alpha: float, steps: int, start: MassState | None = None) -> Iterator[FrozenSplit]:
    """Yield the split of every state mu_0 .. mu_steps in order.

    The state at time t is ``split.state``; the next state is built lazily
    from the split, so consumers see each split exactly once.
    """
    state = MassState.delta(alpha) if start is None else start
    end = state.t + steps
    while True:
        split = freeze_split(state)
        yield split
        if state.t >= end:
            return
        state = heat_step(split)


def geometric_schedule(steps: int) -> list[int]:
    """Powers of two up to ``steps``, plus ``steps`` itself."""
    out = []
    p = 1
    while p < steps:
        out.append(p)
        p *= 2
    out.append(steps)
    return out


def linear_schedule(steps: int, every: int) -> list[int]:
    if every < 1:
        raise ValueError("linear schedule stride must be >= 1")
    out = list(range(every, steps + 1, every))
    if not out or out[-1] != steps:
        out.append(steps)
    return out


def run_fbd(
    alpha: float,
    steps: int,
    sample_schedule: Sequence[int] | None = None,
    snapshot_times: Sequence[int] = (),
    observer: Callable[[FrozenSplit], None] | None = None,
    validate: bool = True,
) -> Trajectory:
    """Run FBD-alpha from delta(0) for ``steps`` steps.

    Rows are recorded at the times in ``sample_schedule`` (default:
    geometric).  ``observer`` is called with every split, including t=0.
    With ``validate`` set, each sampled row's invariants are enforced and
    a violation raises InvalidState.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    schedule = geometric_schedule(steps) if sample_schedule is None else list(sample_schedule)
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("sample schedule must be strictly increasing")
    if schedule and (schedule[0] < 0 or schedule[-1] > steps):
        raise ValueError("sample schedule entries must lie in [0, steps]")
    sample_at = set(schedule)
    snap_at = set(snapshot_times)

    rows: list[DiagnosticsRow] = []
    snaps: list[tuple[int, MassState]] = []
    split = None
    for split in evolve(alpha, steps):
        if observer is not None:
            observer(split)
        t = split.t
        if t in sample_at:
            row = diagnostics(split)
            if validate:
                bad = check_row(row, alpha)
                if bad:
                    raise InvalidState(f"invariant failure at t={t}: {', '.join(bad)} ({row})")
            rows.append(row)
            logger.debug("t=%d beta=%d beta/sqrt(t)=%.6f", t, row.beta, row.beta_scaled)
        if t in snap_at:
            snaps.append((t, split.state))
    return Trajectory(alpha, rows, split.state, snaps)
