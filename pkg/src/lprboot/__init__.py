"""Bootstrap Lasso+Partial Ridge confidence intervals for sparse linear models."""

from .bootstrap import (
    BootstrapConfig,
    IntervalSet,
    bootstrap_intervals,
    paired_bootstrap_ci,
    residual_bootstrap_ci,
)
from .diagnostics import block_decompose, cliff_split, diagnose, irrepresentable_margin
from .evalmetrics import MetricTable, RunRecord, summarize
from .regression import (
    Dataset,
    FitResult,
    fit_lasso,
    fit_lasso_ols,
    fit_lpr,
    fit_ols_on_support,
    fit_partial_ridge,
    lasso_path,
    soft_threshold,
    standardize,
)
from .simgen import GroundTruth, Scenario
from .simulation import run_scenario, write_outputs
from .tuning import CvConfig, CvResult, cv_lasso_ols, default_lambda2

__version__ = "0.1.0"

__all__ = [
    "BootstrapConfig",
    "CvConfig",
    "CvResult",
    "Dataset",
    "FitResult",
    "GroundTruth",
    "IntervalSet",
    "MetricTable",
    "RunRecord",
    "Scenario",
    "block_decompose",
    "bootstrap_intervals",
    "cliff_split",
    "cv_lasso_ols",
    "default_lambda2",
    "diagnose",
    "fit_lasso",
    "fit_lasso_ols",
    "fit_lpr",
    "fit_ols_on_support",
    "fit_partial_ridge",
    "irrepresentable_margin",
    "lasso_path",
    "paired_bootstrap_ci",
    "residual_bootstrap_ci",
    "run_scenario",
    "soft_threshold",
    "standardize",
    "summarize",
    "write_outputs",
]
