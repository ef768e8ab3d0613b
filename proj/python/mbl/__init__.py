"""Python access to the mbl simulation core."""

from ._mbl import (
    CSV_HEADER,
    ConfigError,
    Env,
    bias_level,
    compute_tau,
    env_from_json,
    epoch_starts,
    epsilon_m,
    kernel_power_row,
    make_env,
    normalize_config,
    paulin_bound,
    run_experiment,
    surrogate,
    tv_distance,
    verify,
    verify_suites,
)

__all__ = [
    "CSV_HEADER",
    "ConfigError",
    "Env",
    "bias_level",
    "compute_tau",
    "env_from_json",
    "epoch_starts",
    "epsilon_m",
    "kernel_power_row",
    "make_env",
    "normalize_config",
    "paulin_bound",
    "run_experiment",
    "surrogate",
    "tv_distance",
    "verify",
    "verify_suites",
]
