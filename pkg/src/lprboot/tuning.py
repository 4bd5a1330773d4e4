"""Choosing lambda1 by K-fold cross-validation of the Lasso+OLS refit, and the lambda2 default."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllFitsFailed, InvalidFoldCount, LprbootError
from .regression import Dataset, fit_ols_on_support, lambda_grid, lasso_path, standardize


@dataclass(frozen=True)
class CvConfig:
    k_folds: int = 5
    grid: np.ndarray | None = None
    seed: int = 0
    n_lambda: int = 100
    lambda_ratio: float = 1e-3


@dataclass(frozen=True, eq=False)
class CvResult:
    lambda_optimal: float
    grid: np.ndarray
    cve: np.ndarray
    per_fold_pe: np.ndarray


def default_lambda2(n) -> float:
    if n < 1:
        raise ValueError("n must be positive")
    return 1.0 / n


def make_folds(n, k, seed) -> list[np.ndarray]:
    """Split a seeded permutation of range(n) into k folds whose sizes differ by at most one."""
    if not 2 <= k <= n:
        raise InvalidFoldCount(f"need 2 <= k <= n, got k={k}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(f) for f in np.array_split(perm, k)]


def fold_split(data: Dataset, test):
    """Re-standardized training fold and raw held-out rows for one fold."""
    mask = np.ones(data.n, dtype=bool)
    mask[test] = False
    train = standardize(data.x[mask], data.y[mask], constant="zero")
    return train, data.x[test], data.y[test]


def prediction_error(train: Dataset, beta_std, x_test, y_test) -> float:
    beta = train.to_raw(beta_std)
    pred = train.y_mean + (x_test - train.column_means) @ beta
    r = y_test - pred
    return float(np.mean(r * r))


def _fold_errors(data, test, grid):
    train, x_test, y_test = fold_split(data, test)
    pe = np.full(grid.size, np.nan)
    try:
        path = lasso_path(train, grid)
    except (LprbootError, np.linalg.LinAlgError, ValueError):
        return pe
    prev_support = np.empty(0, dtype=np.int64)
    beta = np.zeros(data.p)
    for j, fit in enumerate(path):
        # The refit only changes when the selected set does.
        if not np.array_equal(fit.support, prev_support):
            try:
                beta = fit_ols_on_support(train, fit.support).beta_std
            except (LprbootError, np.linalg.LinAlgError):
                beta = None
            prev_support = fit.support
        if beta is not None:
            pe[j] = prediction_error(train, beta, x_test, y_test)
    return pe


def cv_lasso_ols(data: Dataset, config: CvConfig = CvConfig()) -> CvResult:
    """K-fold cross-validated prediction error of Lasso+OLS along a lambda1 grid.

    The optimum is the arg-min of the mean held-out error; ties go to the
    largest lambda1. Grid points that fail on any fold are excluded.
    """
    grid = config.grid
    if grid is None:
        grid = lambda_grid(data, config.n_lambda, config.lambda_ratio)
    grid = np.asarray(grid, dtype=np.float64).ravel()
    if grid.size == 0 or np.any(grid < 0) or np.any(np.diff(grid) >= 0):
        raise ValueError("grid must be nonempty, nonnegative and strictly decreasing")
    folds = make_folds(data.n, config.k_folds, config.seed)
    per_fold = np.vstack([_fold_errors(data, test, grid) for test in folds])
    for k, row in enumerate(per_fold):
        if not np.any(np.isfinite(row)):
            raise AllFitsFailed(f"every grid point failed on fold {k}")
    cve = per_fold.mean(axis=0)
    finite = np.isfinite(cve)
    if not finite.any():
        raise AllFitsFailed("no grid point succeeded on every fold")
    best = np.flatnonzero(cve == np.min(cve[finite]))[0]
    return CvResult(float(grid[best]), grid, cve, per_fold)
