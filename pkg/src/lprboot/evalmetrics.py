"""Monte-Carlo summaries: coverage, interval length, bias, SD and RMSE per coefficient."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bootstrap import IntervalSet
from .errors import DimensionMismatch, EmptyRecords
from .simgen import GroundTruth

METRICS = ("coverage", "mean_length", "bias", "sd", "rmse")


@dataclass(frozen=True, eq=False)
class RunRecord:
    rep_index: int
    intervals: IntervalSet
    point_estimate: np.ndarray


@dataclass(frozen=True, eq=False)
class MetricTable:
    coverage: np.ndarray
    mean_length: np.ndarray
    bias: np.ndarray
    sd: np.ndarray
    rmse: np.ndarray
    large_set: np.ndarray
    group_summaries: dict

    def rows(self, beta0):
        large = np.zeros(self.coverage.size, dtype=bool)
        large[self.large_set] = True
        for j in range(self.coverage.size):
            yield (j, beta0[j], "large" if large[j] else "small", self.coverage[j],
                   self.mean_length[j], self.bias[j], self.sd[j], self.rmse[j])


def _stack(records, p):
    if not records:
        raise EmptyRecords("need at least one run record")
    # Fixed reduction order regardless of how records were collected.
    ordered = sorted(records, key=lambda r: r.rep_index)
    lower = np.vstack([r.intervals.lower for r in ordered])
    upper = np.vstack([r.intervals.upper for r in ordered])
    point = np.vstack([r.point_estimate for r in ordered])
    if lower.shape[1] != p or point.shape[1] != p:
        raise DimensionMismatch(f"records have {lower.shape[1]} coefficients, truth has {p}")
    return lower, upper, point


def coverage(records, truth: GroundTruth) -> np.ndarray:
    lower, upper, _ = _stack(records, truth.beta0.size)
    hit = (lower <= truth.beta0) & (truth.beta0 <= upper)
    return hit.mean(axis=0)


def group_means(table_values: dict, large_set, p) -> dict:
    large = np.zeros(p, dtype=bool)
    large[np.asarray(large_set, dtype=np.int64)] = True
    out = {}
    for name, mask in (("large", large), ("small", ~large)):
        out[name] = {m: (float(np.mean(v[mask])) if mask.any() else None)
                     for m, v in table_values.items()}
        out[name]["count"] = int(mask.sum())
    return out


def summarize(records, truth: GroundTruth, large_set=None) -> MetricTable:
    """Per-coefficient metrics plus their means over the large set and its complement.

    SD uses divisor reps, so rmse^2 = bias^2 + sd^2.
    """
    beta0 = truth.beta0
    large_set = truth.large_set if large_set is None else np.asarray(large_set)
    lower, upper, point = _stack(records, beta0.size)
    err = point - beta0
    values = {
        "coverage": ((lower <= beta0) & (beta0 <= upper)).mean(axis=0),
        "mean_length": (upper - lower).mean(axis=0),
        "bias": err.mean(axis=0),
        # identical estimates give exactly zero spread rather than rounding noise
        "sd": np.where(np.ptp(point, axis=0) == 0, 0.0, point.std(axis=0)),
        "rmse": np.sqrt(np.mean(err * err, axis=0)),
    }
    groups = group_means(values, large_set, beta0.size)
    return MetricTable(**values, large_set=np.asarray(large_set), group_summaries=groups)
