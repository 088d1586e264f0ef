"""Monte Carlo simulation of the omega-killed stable process."""

from .paths import (
    DIRECTIONS,
    KILLING_MODES,
    STEPPING_MODES,
    PathConfig,
    PathEnsembleReport,
    PathSample,
    censor_path,
    dump_paths_csv,
    estimate_fixed_time_values,
    estimate_killing_probability,
    estimate_policy_value,
    estimate_sup_moment,
    resolve_threads,
    simulate_frozen_kill_times,
    simulate_omega_killed_path,
)
from .rng import PhiloxStream, philox4x32
from .stable import (
    cms_constants,
    rho_to_skewness,
    sample_stable_increment,
    skewness_to_rho,
    stable_scale,
)

__all__ = [
    "DIRECTIONS",
    "KILLING_MODES",
    "STEPPING_MODES",
    "PathConfig",
    "PathEnsembleReport",
    "PathSample",
    "PhiloxStream",
    "censor_path",
    "cms_constants",
    "dump_paths_csv",
    "estimate_fixed_time_values",
    "estimate_killing_probability",
    "estimate_policy_value",
    "estimate_sup_moment",
    "philox4x32",
    "resolve_threads",
    "rho_to_skewness",
    "sample_stable_increment",
    "simulate_frozen_kill_times",
    "simulate_omega_killed_path",
    "skewness_to_rho",
    "stable_scale",
]
