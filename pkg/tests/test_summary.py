"""Empirical summaries, KS distances, verdicts and the replica fan-out."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from evals.summary import (
    EmpiricalSummary,
    TestVerdict,
    ecdf_frame,
    ks_distance,
    map_replicas,
    multinomial_deviation,
    multinomial_verdict,
    relative_error,
    split_counts,
)
from utils.errors import ConfigurationError


def test_summary_statistics():
    s = EmpiricalSummary([1.0, 2.0, 3.0, 4.0])
    assert (s.count, s.sum, s.mean) == (4, 10.0, 2.5)
    assert s.variance == pytest.approx(5 / 3)
    assert s.std_error == pytest.approx(math.sqrt(5 / 12))
    assert s.describe() == {"count": 4, "mean": 2.5, "variance": pytest.approx(5 / 3)}


def test_empty_summary():
    s = EmpiricalSummary()
    assert s.count == 0
    assert math.isnan(s.mean) and math.isnan(s.std_error)
    assert EmpiricalSummary.merge_all([]).count == 0


@given(st.lists(st.lists(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False), max_size=30),
                min_size=1, max_size=6),
       st.randoms())
@settings(max_examples=60, deadline=None)
def test_merge_order_does_not_matter(chunks, rnd):
    parts = [EmpiricalSummary(c) for c in chunks]
    shuffled = parts[:]
    rnd.shuffle(shuffled)
    a, b = EmpiricalSummary.merge_all(parts), EmpiricalSummary.merge_all(shuffled)
    assert a.count == b.count
    assert a.sum == b.sum
    assert a.sum_sq == b.sum_sq


def test_merge_keeps_bins():
    bins = [0.0, 1.0, 2.0]
    merged = EmpiricalSummary.of([0.5], bins).merge(EmpiricalSummary([1.5, 1.7]))
    assert merged.histogram().tolist() == [1, 2]
    with pytest.raises(ConfigurationError):
        EmpiricalSummary.of([0.5], bins).merge(EmpiricalSummary.of([0.5], [0.0, 2.0]))


def test_ks_distance_matches_scipy():
    sample = np.random.default_rng(0).exponential(size=500)
    ours = ks_distance(EmpiricalSummary(sample), stats.expon.cdf)
    assert ours == pytest.approx(stats.kstest(sample, "expon").statistic, abs=1e-12)


def test_ks_distance_with_atoms():
    # target: P(0) = 1/2, P(1) = 1/2
    cdf = lambda x: np.where(x < 0, 0.0, np.where(x < 1, 0.5, 1.0))
    left = lambda x: np.where(x <= 0, 0.0, np.where(x <= 1, 0.5, 1.0))
    exact = EmpiricalSummary([0.0, 1.0, 0.0, 1.0])
    assert ks_distance(exact, cdf, left) == 0.0
    skewed = EmpiricalSummary([0.0, 0.0, 0.0, 1.0])
    assert ks_distance(skewed, cdf, left) == pytest.approx(0.25)


def test_ks_distance_on_small_samples_warns(caplog):
    with caplog.at_level("WARNING", logger="evals.summary"):
        assert ks_distance(EmpiricalSummary([0.5]), lambda x: np.clip(x, 0.0, 1.0)) == pytest.approx(0.5)
    assert "KS distance on 1 samples" in caplog.text


def test_ks_distance_of_an_empty_sample():
    with pytest.raises(ConfigurationError):
        ks_distance(EmpiricalSummary(), lambda x: x)


def test_ecdf_frame():
    frame = ecdf_frame(EmpiricalSummary([0.0, 1.0]), lambda x: np.clip(x, 0, 1), grid=[0.0, 0.5, 1.0])
    assert frame["empirical_cdf"].tolist() == [0.5, 0.5, 1.0]
    assert frame["target_cdf"].tolist() == [0.0, 0.5, 1.0]


def test_verdicts():
    verdict = TestVerdict("lln", "relative_error", 0.01, 0.05, 1000, seed=3, streams=4)
    assert verdict.passed
    record = verdict.to_dict()
    assert record["seed_manifest"] == {"seed": 3, "streams": 4}
    assert record["passed"] is True
    assert not TestVerdict("x", "ks", 0.2, 0.1, 10, seed=1).passed
    assert TestVerdict("x", "ks", 0.2, 0.1, 10, seed=1, asserted=False).passed


def test_relative_error():
    assert relative_error(1.1, 1.0) == pytest.approx(0.1)
    assert relative_error(0.2, 0.0) == 0.2


def test_multinomial_deviation():
    sample = np.array([0.0] * 50 + [1.0] * 50)
    dev = multinomial_deviation(sample, [0.0, 1.0], [0.5, 0.5])
    assert dev["max_z"] == 0.0 and dev["outside_support"] == 0
    outside = multinomial_deviation(np.array([0.0, 2.0]), [0.0, 1.0], [0.5, 0.5])
    assert math.isinf(outside["max_z"])
    certain = multinomial_deviation(np.array([0.0, 1.0]), [0.0, 1.0], [1.0, 0.0])
    assert math.isinf(certain["max_z"])


def test_multinomial_verdict():
    verdict = multinomial_verdict("U", np.full(10, -1.0), [-1.0], [1.0], seed=1, streams=1)
    assert verdict.passed
    assert verdict.details["empirical_weights"] == {-1.0: 1.0}


@pytest.mark.parametrize("total, replicas, expected", [
    (10, 3, [4, 3, 3]),
    (2, 4, [1, 1, 0, 0]),
    (0, 2, [0, 0]),
])
def test_split_counts(total, replicas, expected):
    assert split_counts(total, replicas) == expected


def test_split_counts_rejects():
    with pytest.raises(ConfigurationError):
        split_counts(5, 0)


def test_map_replicas_does_not_depend_on_threads():
    task = lambda rng, size: rng.uniform(size).sum()
    one = map_replicas(task, seed=7, sizes=[5, 6, 7, 8], threads=1, show_progress=False)
    four = map_replicas(task, seed=7, sizes=[5, 6, 7, 8], threads=4, show_progress=False)
    assert one == four
    shifted = map_replicas(task, seed=7, sizes=[6, 7, 8], threads=2, offset=1, show_progress=False)
    assert shifted[0] != one[0]
