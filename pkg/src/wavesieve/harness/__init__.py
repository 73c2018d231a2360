from .config import (ExperimentConfig, build_basis, build_estimator_config,
                     build_model_spec, fitted_link_coefficients, parse_config)
from .experiments import Report, run_experiment, run_replication
from .stats import angular_error_deg, ks_distance, loglog_slope

__all__ = [
    "ExperimentConfig", "Report",
    "angular_error_deg", "build_basis", "build_estimator_config",
    "build_model_spec", "fitted_link_coefficients", "ks_distance",
    "loglog_slope", "parse_config", "run_experiment", "run_replication",
]
