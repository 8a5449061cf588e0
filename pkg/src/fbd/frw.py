"""Monte Carlo simulation of Frozen Random Walk-(n, alpha).

Particles are held as a site -> count array.  Each step the
floor(n alpha / 2) leftmost and rightmost particles stay put and every
other particle jumps +-1 with probability 1/2; at a site holding c free
particles the number jumping right is drawn as Binomial(c, 1/2).

Particles are exchangeable, so which of several co-located particles is
frozen does not change the law; with counts no particle labels exist
and the outcome is a function of the seed alone.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np


def freeze_count(n: int, alpha: float) -> int:
    return math.floor(n * alpha / 2)


def trial_seeds(master_seed: int, trials: int) -> list[np.random.SeedSequence]:
    """Per-trial seeds: the children of ``SeedSequence(master_seed)``, in order."""
    return np.random.SeedSequence(master_seed).spawn(trials)


@dataclass
class ParticleEnsemble:
    n: int
    alpha: float
    t: int
    counts: np.ndarray  # counts[i] particles at site i - offset
    offset: int
    seed: int | None
    rng: np.random.Generator = field(repr=False)

    @classmethod
    def at_origin(cls, n: int, alpha: float, seed) -> "ParticleEnsemble":
        if n < 1:
            raise ValueError("n must be >= 1")
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        counts = np.array([n], dtype=np.int64)
        return cls(n, alpha, 0, counts, 0, ss.entropy, np.random.Generator(np.random.PCG64(ss)))

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.counts.size) - self.offset

    @property
    def positions(self) -> np.ndarray:
        """Sorted particle positions."""
        return np.repeat(self.sites, self.counts)

    def profile(self) -> dict[int, float]:
        nz = np.flatnonzero(self.counts)
        return {int(i - self.offset): self.counts[i] / self.n for i in nz}

    def frozen_counts(self) -> np.ndarray:
        """Per-site number of particles frozen at the current step."""
        k = freeze_count(self.n, self.alpha)
        c = self.counts
        before_left = np.cumsum(c) - c
        left = np.clip(k - before_left, 0, c)
        after_right = np.cumsum(c[::-1])[::-1] - c
        right = np.clip(k - after_right, 0, c)
        return left + right


def frw_step(ens: ParticleEnsemble) -> ParticleEnsemble:
    """Advance one step; the returned ensemble shares (and advances) ``ens.rng``."""
    c = ens.counts
    frozen = ens.frozen_counts()
    free = c - frozen
    right = ens.rng.binomial(free, 0.5)
    left = free - right
    new = np.zeros(c.size + 2, dtype=np.int64)
    new[1:-1] += frozen
    new[2:] += right
    new[:-2] += left
    nz = np.flatnonzero(new)
    lo, hi = nz[0], nz[-1]
    # keep the window symmetric about the origin so offsets stay simple
    offset = ens.offset + 1
    pad = min(lo, new.size - 1 - hi)
    new = new[pad:new.size - pad]
    return ParticleEnsemble(ens.n, ens.alpha, ens.t + 1, new, offset - pad, ens.seed, ens.rng)


def frw_run(n: int, alpha: float, steps: int, seed) -> ParticleEnsemble:
    if steps < 0:
        raise ValueError("steps must be >= 0")
    ens = ParticleEnsemble.at_origin(n, alpha, seed)
    for _ in range(steps):
        ens = frw_step(ens)
    return ens


def empirical_boundary(ens: ParticleEnsemble) -> int:
    """Position of the k-th rightmost particle, k = max(1, floor(n alpha/2))."""
    k = max(1, freeze_count(ens.n, ens.alpha))
    return int(ens.positions[ens.n - k])


@dataclass
class AveragedProfile:
    n: int
    alpha: float
    t: int
    trials: int
    master_seed: int
    sites: np.ndarray
    counts: np.ndarray  # particle counts summed over trials

    @property
    def fractions(self) -> np.ndarray:
        return self.counts / (self.n * self.trials)

    def as_dict(self) -> dict[int, float]:
        return {int(s): float(f) for s, f in zip(self.sites, self.fractions)}

    def standard_errors(self, per_trial: np.ndarray) -> np.ndarray:
        """MC standard error per site from the per-trial fraction matrix."""
        if self.trials < 2:
            return np.full(self.sites.size, np.nan)
        return per_trial.std(axis=0, ddof=1) / math.sqrt(self.trials)


def _single(args) -> tuple[np.ndarray, int]:
    n, alpha, steps, ss = args
    ens = frw_run(n, alpha, steps, ss)
    return ens.counts, ens.offset


def run_trials(n: int, alpha: float, steps: int, trials: int, master_seed: int, jobs: int = 1):
    """Per-trial count arrays aligned on a common site grid ``-steps..steps``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    work = [(n, alpha, steps, ss) for ss in trial_seeds(master_seed, trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_single, work))
    else:
        results = [_single(w) for w in work]
    grid = np.zeros((trials, 2 * steps + 1), dtype=np.int64)
    for i, (counts, offset) in enumerate(results):
        start = steps - offset
        grid[i, start:start + counts.size] = counts
    return np.arange(-steps, steps + 1), grid


def frw_average(n: int, alpha: float, steps: int, trials: int, master_seed: int, jobs: int = 1) -> AveragedProfile:
    """Average the empirical profiles of ``trials`` independent runs.

    Trial i uses the i-th child of ``SeedSequence(master_seed)``.  Counts
    are summed as integers, so the result does not depend on ``jobs``.
    """
    sites, grid = run_trials(n, alpha, steps, trials, master_seed, jobs)
    total = grid.sum(axis=0)
    nz = np.flatnonzero(total)
    lo, hi = nz[0], nz[-1] + 1
    return AveragedProfile(n, alpha, steps, trials, master_seed, sites[lo:hi], total[lo:hi])
