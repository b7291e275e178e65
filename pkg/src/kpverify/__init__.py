"""Numerical verification of the Kneser-Poulsen machinery for unions of balls."""

from .dynamics import (
    ArchimedesInstance,
    CheckResult,
    Motion,
    archimedes_check,
    csikos_derivative,
    kp_defect,
    lifted_monotone_motion,
    linear_motion,
    proof_chain_check,
    total_volume_derivative_fd,
    triple_count_trace,
    wall_s_derivative_fd,
)
from .geometry import (
    BallConfiguration,
    GeometryError,
    RadiusFamily,
    Tolerances,
    closest_point_in_lens,
    distance_matrix,
    is_expansion,
    lens_meets_ball,
    lens_nonempty,
    pair_interaction_count,
    power,
    theorem_condition_holds,
)
from .measure import (
    arc_polygon_area,
    ball_volume,
    clip_disk_by_halfplanes,
    union_area_2d,
    union_length_1d,
    wall_length_2d,
)
from .montecarlo import MCEstimate, truncated_cell_volume_mc, union_volume_mc, wall_volume_mc
from .power import cell_contains, power_cell, radical_hyperplane, truncated_cell, wall

__version__ = "0.1.0"
