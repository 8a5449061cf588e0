"""Symmetric mass distributions on Z and the freeze/diffuse step.

A state is stored as a half-array ``half`` with ``half[x]`` the mass at
site ``x >= 0``; the mass at ``-x`` equals the mass at ``x``.  Site 0 is
stored once with its full mass, so the total mass is
``half[0] + 2 * sum(half[1:])``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Slack for suffix sums that should equal alpha/2 exactly.
TIE_EPS = 1e-14
# Frozen entries more negative than this mean the mass array is corrupt.
NEG_TOL = 1e-13


class InvalidState(ValueError):
    """A mass array violates the structural invariants of the process."""


def _frozen_array(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _trim(a: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(a)
    return a[: nz[-1] + 1] if nz.size else a[:1]


def half_total(half: np.ndarray) -> float:
    """Total mass of a half-array (site 0 counted once)."""
    if half.size == 0:
        return 0.0
    return math.fsum((half[0], 2.0 * math.fsum(half[1:])))


@dataclass(frozen=True)
class MassState:
    alpha: float
    t: int
    half: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        object.__setattr__(self, "half", _frozen_array(_trim(np.asarray(self.half, dtype=np.float64))))

    @classmethod
    def delta(cls, alpha: float) -> "MassState":
        """Unit mass at the origin, time 0."""
        return cls(alpha, 0, np.array([1.0]))

    @classmethod
    def from_full(cls, alpha: float, t: int, masses: dict[int, float]) -> "MassState":
        """Build from a symmetric ``{site: mass}`` map over Z (both signs given)."""
        top = max(abs(x) for x in masses)
        half = np.zeros(top + 1)
        for x, m in masses.items():
            if m != masses.get(-x, 0.0):
                raise InvalidState(f"mass map is not symmetric at site {x}")
            half[abs(x)] = m
        return cls(alpha, t, half)

    @property
    def max_site(self) -> int:
        return int(self.half.size - 1)

    @property
    def total(self) -> float:
        return half_total(self.half)

    def mass_at(self, x: int) -> float:
        x = abs(x)
        return float(self.half[x]) if x < self.half.size else 0.0

    def full(self) -> tuple[np.ndarray, np.ndarray]:
        """Sites ``-L..L`` and their masses as two arrays."""
        sites = np.arange(-self.max_site, self.max_site + 1)
        masses = np.concatenate([self.half[:0:-1], self.half])
        return sites, masses

    def validate(self) -> None:
        """Raise InvalidState if any structural invariant fails."""
        if np.any(self.half < 0.0):
            raise InvalidState(f"negative mass at t={self.t}")
        if abs(self.total - 1.0) > 1e-12 * (self.t + 1):
            raise InvalidState(f"total mass {self.total!r} != 1 at t={self.t}")
        if self.max_site > self.t:
            raise InvalidState(f"support reaches {self.max_site} > t={self.t}")
        b = boundary(self)
        if self.max_site >= b + 2:
            raise InvalidState(f"mass at site {self.max_site} >= beta+2 = {b + 2} at t={self.t}")


@dataclass(frozen=True)
class FrozenSplit:
    """Free/frozen decomposition of a state; arrays share the state's length."""

    state: MassState
    free: np.ndarray = field(repr=False)
    frozen: np.ndarray = field(repr=False)
    beta: int

    @property
    def alpha(self) -> float:
        return self.state.alpha

    @property
    def t(self) -> int:
        return self.state.t

    @property
    def frozen_total(self) -> float:
        return half_total(self.frozen)

    @property
    def free_total(self) -> float:
        return half_total(self.free)


def suffix_sums(half: np.ndarray) -> np.ndarray:
    """``out[x] = half[x] + half[x+1] + ...``, accumulated from the outside in."""
    return np.cumsum(half[::-1])[::-1]


def boundary(state: MassState) -> int:
    """Largest site x whose right tail mu([x, inf)) reaches alpha/2."""
    tail = suffix_sums(state.half)
    hits = np.flatnonzero(tail >= state.alpha / 2 - TIE_EPS)
    # tail[0] >= 1/2 >= alpha/2 for any valid state
    return int(hits[-1]) if hits.size else 0


def freeze_split(state: MassState) -> FrozenSplit:
    """Freeze the extreme alpha/2 of mass on each side of the origin.

    When the boundary is at the origin both sides' quotas land on site 0,
    so the origin keeps ``alpha - 2 * mu((0, inf))`` frozen, capped at its mass.
    """
    half = state.half
    if np.any(half < -NEG_TOL):
        raise InvalidState(f"negative mass entries at t={state.t}")
    a2 = state.alpha / 2
    beta = boundary(state)
    frozen = np.zeros_like(half)
    outer = half[beta + 1:]
    frozen[beta + 1:] = outer
    beyond = math.fsum(outer)
    if beta > 0:
        frozen[beta] = a2 - beyond
    else:
        frozen[0] = min(half[0], 2.0 * (a2 - beyond))
    if frozen[beta] < -NEG_TOL or frozen[beta] > half[beta] + NEG_TOL:
        raise InvalidState(
            f"frozen mass {frozen[beta]!r} at boundary site {beta} outside [0, {half[beta]!r}] (t={state.t})"
        )
    frozen[beta] = min(max(frozen[beta], 0.0), half[beta])
    free = half - frozen
    return FrozenSplit(state, _frozen_array(free), _frozen_array(frozen), beta)


def heat_step(split: FrozenSplit) -> MassState:
    """One step: free mass splits evenly to both neighbours, frozen mass stays."""
    nu = split.free
    n = nu.size
    out = np.zeros(n + 1)
    out[:n] = split.frozen
    # site 0 receives nu(1)/2 from each side
    if n > 1:
        out[0] += nu[1]
    # x >= 1 receives nu(x-1)/2 + nu(x+1)/2
    out[1:n + 1] += 0.5 * nu
    out[1:n - 1] += 0.5 * nu[2:]
    return MassState(split.alpha, split.t + 1, out)


def step(state: MassState) -> MassState:
    return heat_step(freeze_split(state))
