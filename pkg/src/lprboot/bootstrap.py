"""Residual and paired bootstrap confidence intervals for LPR, Lasso+OLS and Lasso.

Replicate ``b`` draws from its own generator seeded by ``(seed, b)``, so a
run is reproducible bit for bit whatever the worker count. All replicates
of one run are shared by every requested estimator: the bootstrap Lasso is
fitted once per replicate and each second stage is applied to its support.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateResiduals, EmptySamples, RankCollapse
from .regression import (
    Dataset,
    OlsSolver,
    PartialRidgeSolver,
    fit_lasso,
    solve_lasso_gram,
    standardize,
)
from .tuning import default_lambda2

METHODS = ("residual", "paired")
ESTIMATORS = ("lpr", "lasso_ols", "lasso")
QUANTILES = ("linear", "order_statistic")
DEGENERATE_RESIDUAL_TOL = 1e-14


@dataclass(frozen=True)
class BootstrapConfig:
    lambda1: float
    b_replicates: int = 1000
    alpha: float = 0.05
    method: str = "paired"
    estimator: str = "lpr"
    lambda2: float | None = None
    seed: int = 0
    quantile: str = "linear"
    threads: int = 1

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.b_replicates < 2:
            raise ValueError(f"b_replicates must be >= 2, got {self.b_replicates}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}")
        if self.quantile not in QUANTILES:
            raise ValueError(f"quantile must be one of {QUANTILES}, got {self.quantile!r}")
        if self.lambda1 < 0 or (self.lambda2 is not None and self.lambda2 < 0):
            raise ValueError("penalties must be nonnegative")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass(frozen=True, eq=False)
class BootstrapDraws:
    draws: np.ndarray
    replicate_supports: list
    degenerate_count: int = 0


@dataclass(frozen=True, eq=False)
class IntervalSet:
    lower: np.ndarray
    upper: np.ndarray
    alpha: float
    point: np.ndarray
    support: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    flags: frozenset = field(default_factory=frozenset)

    @property
    def length(self) -> np.ndarray:
        return self.upper - self.lower


def replicate_rng(seed, b) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(b)]))


def _uniform_resampler(rng, n):
    return rng.integers(0, n, size=n)


def empirical_quantile(samples, q, method="linear"):
    """Quantile of ``samples`` along axis 0.

    ``linear`` interpolates between order statistics at plotting positions
    (k-1)/(B-1); ``order_statistic`` returns the ceil(B*q)-th order statistic.
    """
    xs = np.sort(np.asarray(samples, dtype=np.float64), axis=0)
    if xs.shape[0] == 0:
        raise EmptySamples("cannot take a quantile of no samples")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    B = xs.shape[0]
    if method == "linear":
        h = (B - 1) * q
        lo = int(np.floor(h))
        hi = min(lo + 1, B - 1)
        frac = h - lo
        if frac == 0.0:
            return xs[lo]
        return xs[lo] + frac * (xs[hi] - xs[lo])
    if method == "order_statistic":
        k = max(1, int(np.ceil(B * q)))
        return xs[k - 1]
    raise ValueError(f"unknown quantile method {method!r}")


def residual_intervals(draws, point, center, alpha, quantile="linear", **extra) -> IntervalSet:
    """Recentered residual-bootstrap interval: [point + center - b_j, point + center - a_j]."""
    a = empirical_quantile(draws, alpha / 2, quantile)
    b = empirical_quantile(draws, 1 - alpha / 2, quantile)
    base = np.asarray(point) + np.asarray(center)
    return IntervalSet(base - b, base - a, alpha, np.asarray(point), **extra)


def percentile_intervals(draws, point, alpha, quantile="linear", **extra) -> IntervalSet:
    lo = empirical_quantile(draws, alpha / 2, quantile)
    hi = empirical_quantile(draws, 1 - alpha / 2, quantile)
    return IntervalSet(lo, hi, alpha, np.asarray(point), **extra)


def lasso_ols_residuals(data: Dataset, lambda1):
    """Residuals Y - X beta_LassoOLS and the Lasso+OLS coefficients (raw scale)."""
    lasso = fit_lasso(data, lambda1)
    beta, _ = OlsSolver(data.x, data.gram).solve(lasso.support, data.xty, data.y)
    return data.y - data.x @ beta, data.to_raw(beta)


def _second_stages(estimators, lasso_beta, support, ols, pr, xty, y):
    out, flags = {}, frozenset()
    for est in estimators:
        if est == "lasso":
            out[est] = lasso_beta
        elif est == "lasso_ols":
            out[est], f = ols.solve(support, xty, y)
            flags |= f
        else:
            out[est], f = pr.solve(support, xty, y)
            flags |= f
    return out, flags


class _FullData:
    """Full-data Lasso, Lasso+OLS and LPR fits (standardized scale)."""

    def __init__(self, data, lambda1, lambda2):
        self.lasso = fit_lasso(data, lambda1).beta_std
        self.support = np.flatnonzero(self.lasso)
        self.ols = OlsSolver(data.x, data.gram)
        self.pr = PartialRidgeSolver(data.x, data.gram, lambda2)
        fits, _ = _second_stages(ESTIMATORS, self.lasso, self.support, self.ols, self.pr,
                                 data.xty, data.y)
        self.fits = fits


class _ResidualReplicates:
    def __init__(self, data, full, lambda1, estimators, resampler):
        self.data, self.full, self.lambda1 = data, full, lambda1
        self.estimators, self.resampler = estimators, resampler
        self.fitted = data.x @ full.fits["lasso_ols"]
        resid = data.y - self.fitted
        self.centered = resid - resid.mean()
        self.degenerate = bool(np.all(np.abs(self.centered) < DEGENERATE_RESIDUAL_TOL))
        if self.degenerate:
            self.centered = np.zeros_like(self.centered)

    def __call__(self, seed_b):
        seed, b = seed_b
        d = self.data
        idx = self.resampler(replicate_rng(seed, b), d.n)
        ystar = self.fitted + self.centered[idx]
        xty = d.x.T @ ystar / d.n
        beta, _, _ = solve_lasso_gram(d.gram, xty, self.lambda1, self.full.lasso)
        support = np.flatnonzero(beta)
        out, flags = _second_stages(self.estimators, beta, support, self.full.ols,
                                    self.full.pr, xty, ystar)
        return {k: d.to_raw(v) for k, v in out.items()}, support, flags


class _PairedReplicates:
    def __init__(self, data, full, lambda1, lambda2, estimators, resampler):
        self.data, self.full, self.lambda1, self.lambda2 = data, full, lambda1, lambda2
        self.estimators, self.resampler = estimators, resampler
        self.degenerate = False

    def __call__(self, seed_b):
        seed, b = seed_b
        d = self.data
        idx = self.resampler(replicate_rng(seed, b), d.n)
        sub = standardize(d.x[idx], d.y[idx], constant="zero")
        warm = self.full.lasso * sub.column_scales
        beta, _, _ = solve_lasso_gram(sub.gram, sub.xty, self.lambda1, warm)
        support = np.flatnonzero(beta)
        ols = OlsSolver(sub.x, sub.gram)
        pr = PartialRidgeSolver(sub.x, sub.gram, self.lambda2)
        out, flags = _second_stages(self.estimators, beta, support, ols, pr, sub.xty, sub.y)
        # replicate-standardized -> full-data standardized -> raw
        return {k: d.to_raw(v / sub.column_scales) for k, v in out.items()}, support, flags


def _run_replicates(worker, seed, B, threads):
    jobs = [(seed, b) for b in range(B)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(worker, jobs))
    return [worker(j) for j in jobs]


def bootstrap_draws(data: Dataset, config: BootstrapConfig, estimators=None, *, resampler=None):
    """Replicate coefficient vectors for each requested estimator.

    Returns ``(draws, full)`` where ``draws`` maps estimator name to
    :class:`BootstrapDraws` and ``full`` holds the full-data fits.
    """
    estimators = tuple(estimators or (config.estimator,))
    for est in estimators:
        if est not in ESTIMATORS:
            raise ValueError(f"unknown estimator {est!r}")
    lambda2 = default_lambda2(data.n) if config.lambda2 is None else config.lambda2
    resampler = resampler or _uniform_resampler
    full = _FullData(data, config.lambda1, lambda2)
    if config.method == "residual":
        worker = _ResidualReplicates(data, full, config.lambda1, estimators, resampler)
        if worker.degenerate:
            warnings.warn("centered residuals are all below 1e-14; intervals collapse to points",
                          DegenerateResiduals, stacklevel=2)
            reps = [worker((config.seed, 0))] * config.b_replicates
        else:
            reps = _run_replicates(worker, config.seed, config.b_replicates, config.threads)
    else:
        worker = _PairedReplicates(data, full, config.lambda1, lambda2, estimators, resampler)
        reps = _run_replicates(worker, config.seed, config.b_replicates, config.threads)
    supports = [r[1] for r in reps]
    collapsed = sum(1 for r in reps if r[2])
    if collapsed and config.method == "paired":
        warnings.warn(f"{collapsed} paired replicates hit the rank-deficiency fallback",
                      RankCollapse, stacklevel=2)
    draws = {
        est: BootstrapDraws(np.vstack([r[0][est] for r in reps]), supports, collapsed)
        for est in estimators
    }
    full.degenerate = worker.degenerate
    return draws, full


def bootstrap_intervals(data: Dataset, config: BootstrapConfig, estimators=None, *,
                        resampler=None) -> dict[str, IntervalSet]:
    """Intervals for every requested estimator from one shared set of replicates."""
    draws, full = bootstrap_draws(data, config, estimators, resampler=resampler)
    center = data.to_raw(full.fits["lasso_ols"])
    flags = set()
    if full.degenerate:
        flags.add("degenerate_residuals")
    if any(d.degenerate_count for d in draws.values()):
        flags.add("rank_collapse")
    out = {}
    for est, d in draws.items():
        point = data.to_raw(full.fits[est])
        extra = dict(support=full.support, flags=frozenset(flags))
        if config.method == "residual":
            out[est] = residual_intervals(d.draws, point, center, config.alpha, config.quantile,
                                          **extra)
        else:
            out[est] = percentile_intervals(d.draws, point, config.alpha, config.quantile,
                                            **extra)
    return out


def residual_bootstrap_ci(data: Dataset, config: BootstrapConfig, *, resampler=None) -> IntervalSet:
    if config.method != "residual":
        raise ValueError("residual_bootstrap_ci needs method='residual'")
    return bootstrap_intervals(data, config, resampler=resampler)[config.estimator]


def paired_bootstrap_ci(data: Dataset, config: BootstrapConfig, *, resampler=None) -> IntervalSet:
    if config.method != "paired":
        raise ValueError("paired_bootstrap_ci needs method='paired'")
    return bootstrap_intervals(data, config, resampler=resampler)[config.estimator]
