"""Estimation and inference for low-dimensional components of linear models
under adaptive data collection, plus a deterministic Monte Carlo harness."""

__version__ = "0.1.0"

from ._config import ConfigError, ExperimentConfig, config_from_mapping, emit_config, load_config
from .estimators import (
    DegenerateDesign,
    DomainError,
    TaleConfig,
    TaleResult,
    calibrate_wdecorr_lambda,
    centered_ols,
    concentration_ci,
    default_s0,
    estimate_sigma,
    f_weight,
    min_gram_eigenvalue_quantile,
    ols_report,
    tale_estimate,
    tale_report,
    tale_weights,
    w_decorrelation,
)
from .generators import (
    GeneratorConfig,
    gen_iid,
    gen_k_adaptive_greedy,
    gen_treatment_assignment,
    generate,
)
from .harness import PRESETS, derive_seed, run_experiment, run_replication
from .metrics import (
    CoverageSummary,
    MissingAlpha,
    ScaledMseRecord,
    coverage_and_width,
    histogram_counts,
    ks_critical,
    ks_distance,
    scaled_mse,
    standardized_errors,
)
from .model_core import (
    AdaptiveDataset,
    EstimateReport,
    ModelSpec,
    RankDeficient,
    center_columns,
    project_onto_colspace,
    solve_least_squares,
)
from .records import MethodResult, ReplicationRecord

__all__ = [
    "AdaptiveDataset",
    "ConfigError",
    "CoverageSummary",
    "DegenerateDesign",
    "DomainError",
    "EstimateReport",
    "ExperimentConfig",
    "GeneratorConfig",
    "MethodResult",
    "MissingAlpha",
    "ModelSpec",
    "PRESETS",
    "RankDeficient",
    "ReplicationRecord",
    "ScaledMseRecord",
    "TaleConfig",
    "TaleResult",
    "calibrate_wdecorr_lambda",
    "center_columns",
    "centered_ols",
    "concentration_ci",
    "config_from_mapping",
    "coverage_and_width",
    "default_s0",
    "derive_seed",
    "emit_config",
    "estimate_sigma",
    "f_weight",
    "gen_iid",
    "gen_k_adaptive_greedy",
    "gen_treatment_assignment",
    "generate",
    "histogram_counts",
    "ks_critical",
    "ks_distance",
    "load_config",
    "min_gram_eigenvalue_quantile",
    "ols_report",
    "project_onto_colspace",
    "run_experiment",
    "run_replication",
    "scaled_mse",
    "solve_least_squares",
    "standardized_errors",
    "tale_estimate",
    "tale_report",
    "tale_weights",
    "w_decorrelation",
]
