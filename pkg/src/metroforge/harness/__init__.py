"""Configuration, experiment drivers and result persistence."""

from .config import (
    ConfigError,
    ExperimentConfig,
    SignalDistribution,
    config_from_dict,
    gaussian_nodes,
    load_config,
    load_preset,
    preset_names,
    uniform_nodes,
)
from .experiments import (
    Ablation,
    baseline_rows,
    load_searched_circuit,
    make_backend,
    run_ablation_study,
    run_decomposition,
    run_scaling_study,
    run_signal_distribution_study,
)
from .records import CSV_COLUMNS, DECOMPOSITION_COLUMNS, ResultRecord, load_results, rows_from_csv, rows_to_csv

__all__ = [
    "Ablation",
    "CSV_COLUMNS",
    "ConfigError",
    "DECOMPOSITION_COLUMNS",
    "ExperimentConfig",
    "ResultRecord",
    "SignalDistribution",
    "baseline_rows",
    "config_from_dict",
    "gaussian_nodes",
    "load_config",
    "load_preset",
    "load_results",
    "load_searched_circuit",
    "make_backend",
    "preset_names",
    "rows_from_csv",
    "rows_to_csv",
    "run_ablation_study",
    "run_decomposition",
    "run_scaling_study",
    "run_signal_distribution_study",
    "uniform_nodes",
]
