"""Deterministic estimators: Lasso, OLS on a support, Partial Ridge and their compositions.

Every solver works on the standardized problem held by :class:`Dataset`
(centered columns with unit second moment, centered response); the
``beta`` field of :class:`FitResult` is mapped back to the raw column scale.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import linalg

from . import _kernels
from .errors import DimensionMismatch, NotConverged, SingularSystem, ZeroVarianceColumn

TOL = 1e-7
KKT_TOL = 1e-7
MAX_ITER = 100_000
RIDGE_FLOOR = 1e-10
DENSE_LIMIT = 4000
VARIANCE_TOL = 1e-12
# Cholesky pivots below this fraction of the largest diagonal mark a singular system.
_PIVOT_RTOL = 1e-10
_INNER_SWEEPS = 30


@dataclass(eq=False)
class Dataset:
    """Standardized design and response plus what is needed to undo the transform."""

    x: np.ndarray
    y: np.ndarray
    column_means: np.ndarray
    column_scales: np.ndarray
    y_mean: float

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @cached_property
    def gram(self) -> np.ndarray:
        return self.x.T @ self.x / self.n

    @cached_property
    def xty(self) -> np.ndarray:
        return self.x.T @ self.y / self.n

    def to_raw(self, beta_std):
        return np.asarray(beta_std) / self.column_scales

    def to_std(self, beta_raw):
        return np.asarray(beta_raw) * self.column_scales

    def intercept(self, beta_raw) -> float:
        return float(self.y_mean - self.column_means @ beta_raw)


@dataclass(frozen=True, eq=False)
class FitResult:
    beta: np.ndarray
    beta_std: np.ndarray
    support: np.ndarray
    iterations: int
    converged: bool
    objective: float
    intercept: float = 0.0
    flags: frozenset = field(default_factory=frozenset)


def _check_xy(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch(f"design must be 2-d, got shape {x.shape}")
    if y.ndim != 1 or y.shape[0] != x.shape[0]:
        raise DimensionMismatch(f"response has shape {y.shape}, expected ({x.shape[0]},)")
    if x.shape[0] < 2 or x.shape[1] < 1:
        raise DimensionMismatch(f"need n >= 2 and p >= 1, got {x.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("design and response must be finite")
    return x, y


def standardize(x_raw, y_raw, *, constant="raise") -> Dataset:
    """Center every column, scale to unit second moment (divisor n) and center y.

    ``constant="zero"`` keeps near-constant columns as all-zero columns with
    unit scale instead of raising; bootstrap resamples rely on this.
    """
    x, y = _check_xy(x_raw, y_raw)
    means = x.mean(axis=0)
    xc = x - means
    var = np.mean(xc * xc, axis=0)
    scales = np.sqrt(var)
    bad = np.flatnonzero(var < VARIANCE_TOL)
    if bad.size:
        if constant == "raise":
            raise ZeroVarianceColumn(bad[0])
        scales[bad] = 1.0
        xc[:, bad] = 0.0
    y_mean = float(y.mean())
    return Dataset(xc / scales, y - y_mean, means, scales, y_mean)


def soft_threshold(z, t):
    """sign(z) * max(|z| - t, 0), elementwise for arrays."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("threshold must be nonnegative")
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def lambda_max(data: Dataset) -> float:
    """Smallest lambda1 at which the Lasso solution is identically zero."""
    return float(np.max(np.abs(data.xty)))


def lambda_grid(data: Dataset, n_lambda=100, ratio=1e-3) -> np.ndarray:
    top = lambda_max(data)
    return top * np.logspace(0.0, np.log10(ratio), n_lambda)


def _polish(gram, xty, lam, beta, active, kkt_tol):
    # Solve the KKT equations on the current active set with fixed signs.
    signs = np.sign(beta[active])
    try:
        factor = linalg.cho_factor(gram[np.ix_(active, active)], check_finite=False)
    except linalg.LinAlgError:
        return None
    sol = linalg.cho_solve(factor, xty[active] - lam * signs, check_finite=False)
    if not np.array_equal(np.sign(sol), signs):
        return None
    cand = np.zeros_like(beta)
    cand[active] = sol
    grad = _kernels.residual_correlation(gram, xty, cand)
    if _kernels.kkt_violation(grad, cand, lam) > kkt_tol:
        return None
    return cand


def solve_lasso_gram(gram, xty, lam, beta0=None, *, tol=TOL, kkt_tol=KKT_TOL, max_iter=MAX_ITER):
    """Cyclic coordinate descent with covariance-update caching.

    A sweep converges when the largest coefficient move is below
    ``tol * max(1, |beta|_inf)`` and the KKT residual is below ``kkt_tol``.
    When the active set repeats between full sweeps, or an active-set pass
    hits its sweep cap, the sign-fixed KKT system is solved directly and
    accepted if it certifies optimality.

    Returns ``(beta, sweeps, converged)``.
    """
    p = xty.shape[0]
    beta = np.zeros(p) if beta0 is None else np.array(beta0, dtype=np.float64)
    lam = float(lam)
    grad = _kernels.residual_correlation(gram, xty, beta)
    sweeps = 0
    prev_active = None
    while sweeps < max_iter:
        dmax = _kernels.sweep_full(gram, lam, beta, grad)
        sweeps += 1
        if dmax < tol * max(1.0, np.max(np.abs(beta), initial=0.0)):
            grad = _kernels.residual_correlation(gram, xty, beta)
            if _kernels.kkt_violation(grad, beta, lam) <= kkt_tol:
                return beta, sweeps, True
        active = np.flatnonzero(beta)
        if active.size == 0 or sweeps >= max_iter:
            prev_active = active
            continue
        if np.array_equal(active, prev_active):
            cand = _polish(gram, xty, lam, beta, active, kkt_tol)
            if cand is not None:
                return cand, sweeps, True
        prev_active = active
        cap = min(_INNER_SWEEPS, max_iter - sweeps)
        inner = _kernels.sweep_active(gram, lam, beta, grad, active, tol, cap)
        sweeps += inner
        if inner == cap:
            # Slow linear convergence on a fixed active set; try the exact solve.
            cand = _polish(gram, xty, lam, beta, np.flatnonzero(beta), kkt_tol)
            if cand is not None:
                return cand, sweeps, True
    return beta, sweeps, False


def lasso_objective(data: Dataset, beta_std, lambda1) -> float:
    r = data.y - data.x @ beta_std
    return float(r @ r / (2 * data.n) + lambda1 * np.sum(np.abs(beta_std)))


def fit_lasso(data: Dataset, lambda1, warm_start=None, *, tol=TOL, kkt_tol=KKT_TOL,
              max_iter=MAX_ITER) -> FitResult:
    """Lasso fit at ``lambda1``; ``warm_start`` is on the standardized scale."""
    if lambda1 < 0:
        raise ValueError("lambda1 must be nonnegative")
    if warm_start is not None and np.shape(warm_start) != (data.p,):
        raise DimensionMismatch(f"warm start has shape {np.shape(warm_start)}, expected ({data.p},)")
    beta, sweeps, ok = solve_lasso_gram(data.gram, data.xty, lambda1, warm_start,
                                        tol=tol, kkt_tol=kkt_tol, max_iter=max_iter)
    if not ok:
        warnings.warn(f"lasso did not converge in {max_iter} sweeps (lambda1={lambda1:g})",
                      NotConverged, stacklevel=2)
    raw = data.to_raw(beta)
    return FitResult(raw, beta, np.flatnonzero(beta), sweeps, ok,
                     lasso_objective(data, beta, lambda1), data.intercept(raw))


def lasso_path(data: Dataset, grid, **kwargs) -> list[FitResult]:
    """Warm-started Lasso fits along a strictly decreasing grid."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty vector")
    if np.any(grid < 0) or np.any(np.diff(grid) >= 0):
        raise ValueError("grid must be nonnegative and strictly decreasing")
    fits = []
    warm = None
    for lam in grid:
        fit = fit_lasso(data, lam, warm, **kwargs)
        fits.append(fit)
        warm = fit.beta_std
    return fits


def _as_support(support, p):
    s = np.unique(np.asarray(support, dtype=np.int64).ravel())
    if s.size and (s[0] < 0 or s[-1] >= p):
        raise IndexError(f"support index out of range for p={p}")
    return s


def _cholesky(a):
    """Cholesky factor or None when the matrix is (numerically) singular."""
    try:
        c, low = linalg.cho_factor(a, check_finite=False)
    except linalg.LinAlgError:
        return None
    d = np.diag(c)
    if d.size and d.min() ** 2 <= _PIVOT_RTOL * max(np.max(np.diag(a)), 1e-300):
        return None
    return c, low


class OlsSolver:
    """Least squares restricted to a support, with factorizations cached by support.

    Rank-deficient supports fall back to the minimum-norm solution.
    """

    def __init__(self, x, gram):
        self.x = x
        self.gram = gram
        self._cache = {}

    def _factor(self, s):
        key = s.tobytes()
        hit = self._cache.get(key)
        if hit is None:
            chol = _cholesky(self.gram[np.ix_(s, s)])
            hit = ("chol", chol) if chol is not None else ("pinv", np.linalg.pinv(self.x[:, s]))
            self._cache[key] = hit
        return hit

    def solve(self, support, xty, y):
        p = self.gram.shape[0]
        beta = np.zeros(p)
        if support.size == 0:
            return beta, frozenset()
        kind, fac = self._factor(support)
        if kind == "chol":
            beta[support] = linalg.cho_solve(fac, xty[support], check_finite=False)
            return beta, frozenset()
        beta[support] = fac @ y
        return beta, frozenset({"rank_deficient"})


class PartialRidgeSolver:
    """Solves (G + lambda2 * P_{S^c}) b = c for many supports against one design.

    Dense SPD factorization for p <= dense_limit; beyond that the penalized
    block is eliminated through an n x n system.
    """

    def __init__(self, x, gram, lambda2, *, dense_limit=DENSE_LIMIT, ridge_floor=RIDGE_FLOOR):
        if lambda2 < 0:
            raise ValueError("lambda2 must be nonnegative")
        self.x = x
        self.gram = gram
        self.lambda2 = float(lambda2)
        self.dense = x.shape[1] <= dense_limit
        self.ridge_floor = ridge_floor
        self._cache = {}

    def _dense_factor(self, s):
        p = self.gram.shape[0]
        a = self.gram.copy()
        pen = np.ones(p, dtype=bool)
        pen[s] = False
        idx = np.flatnonzero(pen)
        a[idx, idx] += self.lambda2
        chol = _cholesky(a)
        if chol is not None:
            return chol, frozenset()
        a[s, s] += self.ridge_floor
        chol = _cholesky(a)
        if chol is None:
            raise SingularSystem("partial ridge system is singular even after the ridge floor")
        return chol, frozenset({"ridge_floor"})

    def _block_factor(self, s):
        n, p = self.x.shape
        pen = np.ones(p, dtype=bool)
        pen[s] = False
        xt = self.x[:, pen]
        if self.lambda2 <= 0:
            raise SingularSystem("block elimination needs lambda2 > 0")
        m = xt @ xt.T
        m[np.diag_indices(n)] += n * self.lambda2
        mchol = linalg.cho_factor(m, check_finite=False)
        if s.size == 0:
            return (mchol, None, None), frozenset()
        w = linalg.cho_solve(mchol, self.x[:, s], check_finite=False)
        h = self.x[:, s].T @ w
        flags = frozenset()
        hchol = _cholesky(h)
        if hchol is None:
            h[np.diag_indices(s.size)] += self.ridge_floor / self.lambda2
            hchol = _cholesky(h)
            if hchol is None:
                raise SingularSystem("partial ridge system is singular even after the ridge floor")
            flags = frozenset({"ridge_floor"})
        return (mchol, w, hchol), flags

    def solve(self, support, xty, y):
        key = support.tobytes()
        hit = self._cache.get(key)
        if hit is None:
            hit = self._dense_factor(support) if self.dense else self._block_factor(support)
            self._cache[key] = hit
        fac, flags = hit
        if self.dense:
            return linalg.cho_solve(fac, xty, check_finite=False), flags
        mchol, w, hchol = fac
        p = self.x.shape[1]
        pen = np.ones(p, dtype=bool)
        pen[support] = False
        beta = np.zeros(p)
        r = y
        if support.size:
            beta[support] = linalg.cho_solve(hchol, w.T @ y, check_finite=False)
            r = y - self.x[:, support] @ beta[support]
        beta[pen] = self.x[:, pen].T @ linalg.cho_solve(mchol, r, check_finite=False)
        return beta, flags


def partial_ridge_objective(data: Dataset, beta_std, support, lambda2) -> float:
    r = data.y - data.x @ beta_std
    pen = np.ones(data.p, dtype=bool)
    pen[support] = False
    return float(r @ r / (2 * data.n) + 0.5 * lambda2 * np.sum(beta_std[pen] ** 2))


def _result(data, beta, support, objective, flags, iterations=0, converged=True):
    raw = data.to_raw(beta)
    return FitResult(raw, beta, support, iterations, converged, objective,
                     data.intercept(raw), frozenset(flags))


def fit_ols_on_support(data: Dataset, support) -> FitResult:
    s = _as_support(support, data.p)
    beta, flags = OlsSolver(data.x, data.gram).solve(s, data.xty, data.y)
    return _result(data, beta, s, partial_ridge_objective(data, beta, np.arange(data.p), 0.0), flags)


def fit_partial_ridge(data: Dataset, support, lambda2, *, dense_limit=DENSE_LIMIT,
                      ridge_floor=RIDGE_FLOOR) -> FitResult:
    s = _as_support(support, data.p)
    solver = PartialRidgeSolver(data.x, data.gram, lambda2, dense_limit=dense_limit,
                                ridge_floor=ridge_floor)
    beta, flags = solver.solve(s, data.xty, data.y)
    return _result(data, beta, s, partial_ridge_objective(data, beta, s, lambda2), flags)


def fit_lasso_ols(data: Dataset, lambda1, warm_start=None, **kwargs) -> FitResult:
    lasso = fit_lasso(data, lambda1, warm_start, **kwargs)
    ols = fit_ols_on_support(data, lasso.support)
    return _result(data, ols.beta_std, lasso.support, ols.objective, ols.flags,
                   lasso.iterations, lasso.converged)


def fit_lpr(data: Dataset, lambda1, lambda2, warm_start=None, **kwargs) -> FitResult:
    """Lasso selection followed by a Partial Ridge refit.

    ``support`` is the Lasso support; the coefficients are generically dense.
    """
    lasso = fit_lasso(data, lambda1, warm_start, **kwargs)
    pr = fit_partial_ridge(data, lasso.support, lambda2)
    return _result(data, pr.beta_std, lasso.support, pr.objective, pr.flags,
                   lasso.iterations, lasso.converged)
