"""Python bindings for the r2b2 C++ library."""

from r2b2._core import (
    ActionSpace,
    BudgetError,
    ConfigError,
    GpMwState,
    GpPosterior,
    IoError,
    JointSpace,
    KernelFamily,
    KernelSpec,
    MixedStrategy,
    NumericalError,
    PayoffTable,
    beta,
    build_game,
    config_digest,
    default_config,
    gpmw_learning_rate,
    level1_select,
    run_experiment,
    run_game,
    sample_prior,
    ucb,
    ucb_grid,
)

__all__ = [
    "ActionSpace",
    "BudgetError",
    "ConfigError",
    "GpMwState",
    "GpPosterior",
    "IoError",
    "JointSpace",
    "KernelFamily",
    "KernelSpec",
    "MixedStrategy",
    "NumericalError",
    "PayoffTable",
    "beta",
    "build_game",
    "config_digest",
    "default_config",
    "gpmw_learning_rate",
    "level1_select",
    "run_experiment",
    "run_game",
    "sample_prior",
    "ucb",
    "ucb_grid",
]
