"""Kernel distribution regression on bags of feature vectors."""

from distreg._core import (
    BagDataset,
    ConfigError,
    DataError,
    DimensionError,
    Error,
    FittedModel,
    IllConditionedError,
    MultiSourceDataset,
    align_sources,
    bag_gram,
    configure_threads_from_env,
    cross_bag_gram,
    fit,
    load_bags,
    mean_task,
    median_heuristic,
    mmd_permutation_test,
    mmd_squared,
    multisource_task,
    rbf_kernel,
    run_protocol,
    sample_basis,
    variance_task,
)

__all__ = [
    "BagDataset",
    "ConfigError",
    "DataError",
    "DimensionError",
    "Error",
    "FittedModel",
    "IllConditionedError",
    "MultiSourceDataset",
    "align_sources",
    "bag_gram",
    "configure_threads_from_env",
    "cross_bag_gram",
    "fit",
    "load_bags",
    "mean_task",
    "median_heuristic",
    "mmd_permutation_test",
    "mmd_squared",
    "multisource_task",
    "rbf_kernel",
    "run_protocol",
    "sample_basis",
    "variance_task",
]
