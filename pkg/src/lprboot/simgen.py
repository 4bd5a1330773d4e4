"""Simulation scenarios: designs, coefficient laws, SNR-calibrated noise, misspecification.

Covers the Normal designs (Toeplitz, exponential decay, equal correlation),
the 2-df multivariate t design, row subsampling of an external matrix, hard
and weak (cliff) sparsity, and the quadratic/interaction misspecified model.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from itertools import combinations

import numpy as np
from scipy import linalg

from .csvio import read_matrix
from .errors import (
    DimensionMismatch,
    NotPositiveDefinite,
    RankDeficient,
    ScenarioError,
    TooFewColumns,
    ZeroSignal,
)

DESIGN_KINDS = ("normal_toeplitz", "normal_expdecay", "normal_equicorr", "t2_toeplitz",
                "external_matrix")
COEFF_KINDS = ("hard", "weak")
METHOD_NAMES = ("rBLPR", "pBLPR", "rBLassoOLS", "pBLassoOLS", "rBLasso", "pBLasso")
N_QUADRATIC = 4


@dataclass
class Scenario:
    n: int
    p: int
    design: dict
    coeffs: dict
    snr: float = 10.0
    reps: int = 1000
    b_replicates: int = 1000
    alpha: float = 0.05
    seed: int = 0
    methods: list = field(default_factory=lambda: ["rBLPR", "pBLPR"])
    lambda2: float | None = None
    k_folds: int = 5
    misspecified: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        known = set(cls.__dataclass_fields__)
        problems = [f"unknown field {k!r}" for k in d if k not in known]
        for req in ("n", "p", "design", "coeffs"):
            if req not in d:
                problems.append(f"{req}: required")
        if problems:
            raise ScenarioError(problems)
        sc = cls(**d)
        sc.validate()
        return sc

    @classmethod
    def load(cls, path) -> "Scenario":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def s(self) -> int:
        return int(self.coeffs.get("s", 10))

    def validate(self):
        problems = []

        def check(name, ok, msg):
            if not ok:
                problems.append(f"{name}: {msg}")

        check("n", isinstance(self.n, int) and self.n >= 2, "must be an integer >= 2")
        check("p", isinstance(self.p, int) and self.p >= 1, "must be an integer >= 1")
        kind = self.design.get("kind") if isinstance(self.design, dict) else None
        check("design.kind", kind in DESIGN_KINDS, f"must be one of {DESIGN_KINDS}")
        if kind == "external_matrix":
            check("design.path", isinstance(self.design.get("path"), str), "path required")
        elif kind in DESIGN_KINDS:
            rho = self.design.get("rho", 0.0)
            check("design.rho", isinstance(rho, (int, float)) and 0 <= rho < 1, "need 0 <= rho < 1")
        ckind = self.coeffs.get("kind") if isinstance(self.coeffs, dict) else None
        check("coeffs.kind", ckind in COEFF_KINDS, f"must be one of {COEFF_KINDS}")
        if ckind in COEFF_KINDS:
            s = self.coeffs.get("s", 10)
            check("coeffs.s", isinstance(s, int) and 0 < s <= (self.p if isinstance(self.p, int) else 0),
                  "need 0 < s <= p")
        check("snr", isinstance(self.snr, (int, float)) and self.snr > 0, "must be > 0")
        check("reps", isinstance(self.reps, int) and self.reps >= 1, "must be an integer >= 1")
        check("b_replicates", isinstance(self.b_replicates, int) and self.b_replicates >= 2,
              "must be an integer >= 2")
        check("alpha", isinstance(self.alpha, (int, float)) and 0 < self.alpha < 1,
              "must lie in (0, 1)")
        check("seed", isinstance(self.seed, int) and self.seed >= 0, "must be a nonnegative integer")
        check("methods", isinstance(self.methods, list) and len(self.methods) > 0
              and all(m in METHOD_NAMES for m in self.methods), f"subset of {METHOD_NAMES}")
        check("lambda2", self.lambda2 is None or (isinstance(self.lambda2, (int, float))
                                                  and self.lambda2 >= 0), "must be >= 0")
        check("k_folds", isinstance(self.k_folds, int) and 2 <= self.k_folds
              <= (self.n if isinstance(self.n, int) else 0), "need 2 <= k_folds <= n")
        check("misspecified", isinstance(self.misspecified, bool), "must be a boolean")
        if self.misspecified and isinstance(self.p, int):
            check("p", self.p >= N_QUADRATIC, f"misspecified model needs p >= {N_QUADRATIC}")
        if problems:
            raise ScenarioError(problems)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    beta0: np.ndarray
    sigma: float | None
    large_set: np.ndarray


def covariance_matrix(kind, rho, p) -> np.ndarray:
    """toeplitz: rho^|i-j|; expdecay: inverse of that matrix; equicorr: rho off the diagonal."""
    if not 0 <= rho < 1:
        raise NotPositiveDefinite(f"rho must satisfy 0 <= rho < 1, got {rho}")
    kind = kind.removeprefix("normal_").removeprefix("t2_")
    lags = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    if kind == "toeplitz":
        sigma = rho ** lags.astype(float)
    elif kind == "expdecay":
        prec = rho ** lags.astype(float)
        sigma = linalg.cho_solve(linalg.cho_factor(prec), np.eye(p))
        sigma = (sigma + sigma.T) / 2
    elif kind == "equicorr":
        sigma = np.full((p, p), float(rho))
        np.fill_diagonal(sigma, 1.0)
    else:
        raise ValueError(f"unknown covariance kind {kind!r}")
    try:
        linalg.cholesky(sigma, lower=True)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    return sigma


def normalize_columns(x) -> np.ndarray:
    """Zero mean and unit variance (divisor n) per column."""
    xc = x - x.mean(axis=0)
    return xc / np.sqrt(np.mean(xc * xc, axis=0))


def sample_design(scenario: Scenario, rng) -> np.ndarray:
    n, p = scenario.n, scenario.p
    kind = scenario.design["kind"]
    rho = float(scenario.design.get("rho", 0.0))
    if kind == "external_matrix":
        raw = read_matrix(scenario.design["path"])
        if raw.shape[0] < n or raw.shape[1] < p:
            raise DimensionMismatch(f"external matrix is {raw.shape}, need at least ({n}, {p})")
        rows = np.sort(rng.choice(raw.shape[0], size=n, replace=False))
        cols = np.arange(p) if raw.shape[1] == p else np.sort(
            rng.choice(raw.shape[1], size=p, replace=False))
        return normalize_columns(raw[np.ix_(rows, cols)])
    z = rng.standard_normal((n, p))
    if kind == "normal_equicorr":
        # (1 - rho) I + rho 11' as a sum of independent parts
        w = rng.standard_normal((n, 1))
        return np.sqrt(1 - rho) * z + np.sqrt(rho) * w
    chol = linalg.cholesky(covariance_matrix(kind, rho, p), lower=True)
    x = z @ chol.T
    if kind == "t2_toeplitz":
        x /= np.sqrt(rng.chisquare(2, size=(n, 1)) / 2)
    return x


def sample_coefficients(coeffs: dict, p, rng) -> GroundTruth:
    """Hard sparsity: s uniform entries on random indices. Weak: s near-one entries, the rest decaying."""
    kind = coeffs["kind"]
    s = int(coeffs.get("s", 10))
    if not 0 < s <= p:
        raise ValueError(f"need 0 < s <= p, got s={s}, p={p}")
    large = np.sort(rng.choice(p, size=s, replace=False))
    beta = np.zeros(p)
    if kind == "hard":
        beta[large] = rng.uniform(coeffs.get("low", 1 / 3), coeffs.get("high", 1.0), size=s)
    elif kind == "weak":
        beta[large] = rng.normal(coeffs.get("mean", 1.0), np.sqrt(coeffs.get("var", 0.001)), size=s)
        small = np.setdiff1d(np.arange(p), large)
        j = np.arange(1, small.size + 1)
        beta[small] = 1.0 / (j + 3.0) ** coeffs.get("decay", 2.0)
    else:
        raise ValueError(f"unknown coefficient kind {kind!r}")
    return GroundTruth(beta, None, large)


def calibrate_sigma(x, beta0, snr) -> float:
    """Noise level giving |X beta0|^2 / (n sigma^2) = snr."""
    return signal_sigma(x @ beta0, snr)


def signal_sigma(mean, snr) -> float:
    if snr <= 0:
        raise ValueError("snr must be positive")
    norm = float(np.linalg.norm(mean))
    if norm == 0:
        raise ZeroSignal("signal is identically zero")
    return norm / np.sqrt(mean.shape[0] * snr)


def draw_alphas(rng, k=N_QUADRATIC) -> np.ndarray:
    """k quadratic then k(k-1)/2 interaction coefficients, iid U(0, 0.1)."""
    return rng.uniform(0.0, 0.1, size=k + k * (k - 1) // 2)


def quadratic_columns(beta_base, k=N_QUADRATIC) -> np.ndarray:
    """Columns carrying the misspecification: the k largest entries of beta_base."""
    order = np.argsort(-np.asarray(beta_base), kind="stable")
    return order[:k]


def misspecified_mean(x, beta_base, alphas, cols=None) -> np.ndarray:
    cols = quadratic_columns(beta_base) if cols is None else np.asarray(cols)
    k = cols.size
    pairs = list(combinations(range(k), 2))
    if len(alphas) != k + len(pairs):
        raise ValueError(f"expected {k + len(pairs)} alphas, got {len(alphas)}")
    xq = x[:, cols]
    mean = x @ beta_base + (xq * xq) @ np.asarray(alphas[:k])
    for a, (i, j) in zip(alphas[k:], pairs):
        mean = mean + a * xq[:, i] * xq[:, j]
    return mean


def pseudo_truth(x, mean, support) -> np.ndarray:
    """Projection coefficients of ``mean`` onto the columns in ``support``; zero elsewhere."""
    support = np.asarray(support)
    xs = x[:, support]
    if np.linalg.matrix_rank(xs) < support.size:
        raise RankDeficient("selected columns are not of full column rank")
    beta = np.zeros(x.shape[1])
    beta[support] = np.linalg.lstsq(xs, mean, rcond=None)[0]
    return beta


def generate_misspecified(x, beta_base, alphas, snr, rng, cols=None):
    """Response with quadratic and interaction terms, and its projection pseudo-truth.

    Returns ``(y, truth)``; the truth's ``large_set`` is the support of beta_base.
    """
    if x.shape[1] < N_QUADRATIC:
        raise DimensionMismatch(f"need at least {N_QUADRATIC} columns")
    mean = misspecified_mean(x, beta_base, alphas, cols)
    sigma = signal_sigma(mean, snr)
    support = np.flatnonzero(beta_base)
    truth = GroundTruth(pseudo_truth(x, mean, support), sigma, support)
    return mean + sigma * rng.standard_normal(x.shape[0]), truth


def preprocess_external(x_raw, y, var_floor=1e-4, top_k=None):
    """Drop columns with variance <= var_floor, then keep the top_k by |corr(x_j, y)|.

    Returns the reduced matrix and the original index of each kept column.
    """
    x = np.asarray(x_raw, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (x.shape[0],):
        raise DimensionMismatch("response length does not match the design")
    keep = np.flatnonzero(x.var(axis=0) > var_floor)
    top_k = keep.size if top_k is None else int(top_k)
    if top_k > keep.size:
        raise TooFewColumns(f"{keep.size} columns survive the variance filter, asked for {top_k}")
    xc = x[:, keep] - x[:, keep].mean(axis=0)
    yc = y - y.mean()
    corr = (xc.T @ yc) / np.sqrt(np.sum(xc * xc, axis=0) * (yc @ yc))
    order = np.argsort(-np.abs(corr), kind="stable")[:top_k]
    index_map = keep[order]
    return x[:, index_map], index_map
