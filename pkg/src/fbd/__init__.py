"""Frozen-boundary diffusion (FBD-alpha) on Z and the Frozen Random Walk."""
from .analysis import (
    ConvergenceError,
    DomainError,
    LimitMeasure,
    check_inequalities,
    g_closed,
    g_series,
    levy_distance,
    limit_cdf,
    moment_growth_check,
    poly_P,
    poly_P_tilde,
    solve_q,
    trunc_gauss_moment,
)
from .engine import DiagnosticsRow, Trajectory, free_moment, moment, run_fbd
from .fbd2d import MassGrid2D, freeze_split_2d, heat_step_2d
from .frw import AveragedProfile, ParticleEnsemble, frw_average, frw_run, frw_step
from .lattice import FrozenSplit, InvalidState, MassState, boundary, freeze_split, heat_step

__version__ = "0.1.0"
