"""Play, stop and Q operators over prox-regular characteristic sets."""
from .bvcalc import (
    Path,
    TimeChange,
    arc_length_profile,
    bv_distance,
    compose_time_change,
    refine,
    reparametrize_by_arclength,
    strict_distance,
    sup_distance,
    variation,
)
from .geometry import (
    Ball,
    Box,
    ComplementOfBall,
    Halfspace,
    Union,
    contains,
    distance,
    project,
    proximal_normal,
    verify_prox_regularity,
)
from .playcore import (
    PlaySolution,
    SolverOptions,
    catching_up_step,
    inclusion_residual,
    normality_report,
    solve_adaptive,
    solve_play,
    vi_residual,
)
from .report import Report

__version__ = "0.1.0"
