"""Multi-bump solutions of the Schrodinger-Newton system (python bindings)."""

from ._core import (
    GroundState,
    bump_points,
    desk_coupling,
    desk_grid_h,
    energy_expansion,
    fit_interaction_constant,
    ground_state,
    interaction_sum_check,
    nondegeneracy_spectrum,
    optimal_radius,
    pair_interaction,
    radial_newton_transform,
    ring_sum,
    scan_and_build,
    set_fft_threads,
)

__all__ = [
    "GroundState",
    "bump_points",
    "desk_coupling",
    "desk_grid_h",
    "energy_expansion",
    "fit_interaction_constant",
    "ground_state",
    "interaction_sum_check",
    "nondegeneracy_spectrum",
    "optimal_radius",
    "pair_interaction",
    "radial_newton_transform",
    "ring_sum",
    "scan_and_build",
    "set_fft_threads",
]
