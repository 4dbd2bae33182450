"""Two-qubit joint homodyne measurement: master equation, trajectories, ensembles."""

from ._core import (
    ConfigError,
    ContractViolation,
    Drive,
    DriveShape,
    Ensemble,
    SystemParams,
    __version__,
    concurrence,
    evolve_me,
    fidelity,
    load_params,
    preset_params,
    purity,
    run_ensemble,
    run_trajectory,
    states,
    steady_alphas,
    steady_rates,
    sweep_threshold,
    trace_distance,
)

__all__ = [
    "ConfigError",
    "ContractViolation",
    "Drive",
    "DriveShape",
    "Ensemble",
    "SystemParams",
    "__version__",
    "concurrence",
    "evolve_me",
    "fidelity",
    "load_params",
    "preset_params",
    "purity",
    "run_ensemble",
    "run_trajectory",
    "states",
    "steady_alphas",
    "steady_rates",
    "sweep_threshold",
    "trace_distance",
]
