"""Experimental two-dimensional analogue of FBD-alpha on Z^2.

Freezing rule: sites are grouped into shells of equal x^2 + y^2 and
frozen from the outermost shell inwards until exactly alpha of mass is
frozen; the threshold shell is frozen in proportion to each site's mass.
Free mass moves 1/4 to each of the four lattice neighbours.

Every site operation is invariant under the symmetries of the square, so
a symmetric grid stays bit-for-bit symmetric.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .lattice import InvalidState


@dataclass(frozen=True)
class MassGrid2D:
    alpha: float
    t: int
    grid: np.ndarray = field(repr=False)  # (2R+1, 2R+1); grid[R + x, R + y]

    @property
    def radius(self) -> int:
        return (self.grid.shape[0] - 1) // 2

    @classmethod
    def delta(cls, alpha: float) -> "MassGrid2D":
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        return cls(alpha, 0, np.ones((1, 1)))

    def total(self) -> float:
        return math.fsum(self.grid.ravel())

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        r = self.radius
        ax = np.arange(-r, r + 1)
        return np.meshgrid(ax, ax, indexing="ij")

    def radial_second_moment(self) -> float:
        x, y = self.coords()
        return math.fsum((self.grid * (x * x + y * y)).ravel())

    def is_symmetric(self) -> bool:
        g = self.grid
        return (
            np.array_equal(g, g[::-1, :])
            and np.array_equal(g, g[:, ::-1])
            and np.array_equal(g, g.T)
        )

    def slice_x0(self) -> tuple[np.ndarray, np.ndarray]:
        r = self.radius
        return np.arange(-r, r + 1), self.grid[r, :].copy()


def freeze_split_2d(grid: MassGrid2D) -> tuple[np.ndarray, np.ndarray]:
    """Split into (free, frozen), freezing the radially outermost alpha of mass."""
    g = grid.grid
    if np.any(g < 0.0):
        raise InvalidState(f"negative mass in 2D grid at t={grid.t}")
    x, y = grid.coords()
    r2 = (x * x + y * y).ravel()
    flat = g.ravel()
    shells = np.unique(r2)[::-1]
    frozen = np.zeros_like(flat)
    remaining = grid.alpha
    for s in shells:
        idx = np.flatnonzero(r2 == s)
        shell_mass = math.fsum(flat[idx])
        if shell_mass <= 0.0:
            continue
        if shell_mass <= remaining:
            frozen[idx] = flat[idx]
            remaining -= shell_mass
        else:
            frozen[idx] = flat[idx] * (remaining / shell_mass)
            remaining = 0.0
        if remaining <= 0.0:
            break
    frozen = frozen.reshape(g.shape)
    return g - frozen, frozen


def heat_step_2d(free: np.ndarray, frozen: np.ndarray, alpha: float, t: int) -> MassGrid2D:
    """Move each free site's mass 1/4 to each neighbour; pad the window when needed."""
    if np.any(free[0, :]) or np.any(free[-1, :]) or np.any(free[:, 0]) or np.any(free[:, -1]):
        free = np.pad(free, 1)
        frozen = np.pad(frozen, 1)
    q = 0.25 * free
    left = np.zeros_like(q)
    right = np.zeros_like(q)
    down = np.zeros_like(q)
    up = np.zeros_like(q)
    left[:-1, :] = q[1:, :]
    right[1:, :] = q[:-1, :]
    down[:, :-1] = q[:, 1:]
    up[:, 1:] = q[:, :-1]
    # pairwise order keeps the sum invariant under x <-> y and sign flips
    return MassGrid2D(alpha, t + 1, frozen + ((left + right) + (down + up)))


def step_2d(grid: MassGrid2D) -> MassGrid2D:
    free, frozen = freeze_split_2d(grid)
    return heat_step_2d(free, frozen, grid.alpha, grid.t)


def run_fbd2d(alpha: float, steps: int, observer=None) -> tuple[MassGrid2D, np.ndarray]:
    """Evolve ``steps`` steps from the origin; return final grid and its free part."""
    g = MassGrid2D.delta(alpha)
    for _ in range(steps):
        free, frozen = freeze_split_2d(g)
        g = heat_step_2d(free, frozen, alpha, g.t)
        if observer is not None:
            observer(g)
    free, _ = freeze_split_2d(g)
    return g, free


def write_matrix_csv(path: str | Path, matrix: np.ndarray) -> None:
    with open(path, "w", newline="\n") as fh:
        for row in matrix:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def write_pgm(path: str | Path, matrix: np.ndarray) -> None:
    """Binary 8-bit portable graymap scaled so the maximum maps to white."""
    top = matrix.max()
    img = np.zeros(matrix.shape, dtype=np.uint8) if top <= 0 else np.round(255 * matrix / top).astype(np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
