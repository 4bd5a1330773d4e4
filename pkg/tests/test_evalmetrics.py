import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lprboot.bootstrap import IntervalSet
from lprboot.errors import DimensionMismatch, EmptyRecords
from lprboot.evalmetrics import RunRecord, coverage, group_means, summarize
from lprboot.simgen import GroundTruth


def record(i, lower, upper, point):
    lower, upper, point = (np.asarray(v, dtype=float) for v in (lower, upper, point))
    return RunRecord(i, IntervalSet(lower, upper, 0.05, point), point)


def truth(beta, large):
    return GroundTruth(np.asarray(beta, dtype=float), 1.0, np.asarray(large))


def test_wide_intervals_cover():
    t = truth([1.0, -2.0, 0.0], [0, 1])
    recs = [record(i, [-1e300] * 3, [1e300] * 3, [0, 0, 0]) for i in range(5)]
    np.testing.assert_array_equal(coverage(recs, t), 1.0)


def test_zero_intervals_miss_nonzero():
    t = truth([1.0, -2.0, 0.0], [0, 1])
    recs = [record(i, [0, 0, 0], [0, 0, 0], [0, 0, 0]) for i in range(4)]
    np.testing.assert_array_equal(coverage(recs, t), [0.0, 0.0, 1.0])


def test_hand_counted_coverage():
    t = truth([0.5], [0])
    hits = [1, 1, 0, 1, 1, 0, 1, 1, 0, 1]
    recs = [record(i, [0.0 if h else 0.6], [1.0], [0.5]) for i, h in enumerate(hits)]
    assert coverage(recs, t)[0] == 0.7


def test_empty_and_mismatched():
    with pytest.raises(EmptyRecords):
        coverage([], truth([1.0], [0]))
    with pytest.raises(DimensionMismatch):
        summarize([record(0, [0, 0], [1, 1], [0, 0])], truth([1.0], [0]))


def test_constant_points():
    t = truth([1.0, 0.2], [0])
    recs = [record(i, [0, 0], [1, 1], [1.5, 0.2]) for i in range(6)]
    m = summarize(recs, t)
    np.testing.assert_array_equal(m.sd, 0.0)
    np.testing.assert_allclose(m.rmse, np.abs(m.bias))
    np.testing.assert_array_equal(m.mean_length, 1.0)


def test_rmse_recomputed_and_groups(rng):
    p, reps = 6, 25
    beta = rng.standard_normal(p)
    t = truth(beta, [1, 4])
    pts = rng.standard_normal((reps, p))
    recs = [record(i, pts[i] - 1, pts[i] + 1, pts[i]) for i in range(reps)]
    m = summarize(recs, t)
    direct = np.sqrt(np.mean((pts - beta) ** 2, axis=0))
    np.testing.assert_allclose(m.rmse, direct, rtol=1e-12)
    g = m.group_summaries
    assert g["large"]["count"] == 2 and g["small"]["count"] == 4
    assert g["large"]["coverage"] == np.mean(m.coverage[[1, 4]])
    assert g["small"]["rmse"] == np.mean(m.rmse[[0, 2, 3, 5]])


def test_group_means_empty_complement():
    out = group_means({"coverage": np.array([0.5, 1.0])}, [0, 1], 2)
    assert out["small"]["coverage"] is None and out["small"]["count"] == 0


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), reps=st.integers(1, 30), p=st.integers(1, 8))
def test_decomposition_and_order_invariance(seed, reps, p):
    rng = np.random.default_rng(seed)
    beta = rng.standard_normal(p)
    pts = rng.standard_normal((reps, p)) * rng.uniform(0.1, 5, size=p) + 3
    half = rng.uniform(0, 2, size=(reps, p))
    recs = [record(i, pts[i] - half[i], pts[i] + half[i], pts[i]) for i in range(reps)]
    t = truth(beta, np.arange(min(2, p)))
    m = summarize(recs, t)
    np.testing.assert_allclose(m.rmse**2, m.bias**2 + m.sd**2, rtol=1e-10, atol=1e-300)
    assert np.all((m.coverage >= 0) & (m.coverage <= 1))
    m2 = summarize([recs[i] for i in rng.permutation(reps)], t)
    for name in ("coverage", "mean_length", "bias", "sd", "rmse"):
        assert getattr(m, name).tobytes() == getattr(m2, name).tobytes()
    assert m.group_summaries == m2.group_summaries


def test_single_rep_is_containment_indicator():
    t = truth([1.0, 0.0, 2.0], [0, 2])
    m = summarize([record(0, [0.5, 0.1, 2.5], [1.5, 0.2, 3.0], [1.0, 0.15, 2.7])], t)
    np.testing.assert_array_equal(m.coverage, [1.0, 0.0, 0.0])


def test_rows_layout():
    t = truth([1.0, 0.0], [0])
    m = summarize([record(0, [0, 0], [2, 1], [1, 0.5])], t)
    rows = list(m.rows(t.beta0))
    assert rows[0][:3] == (0, 1.0, "large") and rows[1][2] == "small"
