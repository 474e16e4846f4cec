"""Lindblad dynamics, quantum jump trajectories and relaxation timescales of
near-degenerate open quantum systems."""

from ._core import (
    ConfigError,
    Model,
    analytic,
    basis_matrix,
    ensemble_average,
    evolve,
    ground_state,
    liouvillian,
    perturbative_slow_eigenvalue,
    preset_names,
    preset_text,
    run_scenario,
    sample_trajectory,
    steady_state,
    thermal_state,
    timescales,
    to_basis,
    two_level,
    v_model,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Model",
    "analytic",
    "basis_matrix",
    "ensemble_average",
    "evolve",
    "ground_state",
    "liouvillian",
    "perturbative_slow_eigenvalue",
    "preset_names",
    "preset_text",
    "run_scenario",
    "sample_trajectory",
    "steady_state",
    "thermal_state",
    "timescales",
    "to_basis",
    "two_level",
    "v_model",
]
