"""Law of large numbers and limit laws for zero-level crossings."""

import math

import numpy as np
import pytest

from config import KS_CRITICAL
from evals.crossings import clt_cdf, clt_levelcrossings, clt_trend, half_normal_cdf, lln_overshoots, perkins_sum
from increments.laws import LaplaceLaw, ProductLaw
from increments.rng import RngState
from utils.errors import CapabilityError, ConfigurationError
from walks.engine import crossings, walk_stream


def test_lln_simple_walk_is_exact(simple, seed):
    # |O| alternates 1, 0 from the origin, so even path sizes average to exactly 1/2
    verdict = lln_overshoots(simple, n_crossings=1_000, seed=seed, replicas=4, threads=2, max_steps=10**8)
    assert not verdict.partial
    assert verdict.details["estimate"] == 0.5
    assert verdict.value == 0.0


def test_lln_with_one_replica_is_a_single_path(laplace, seed):
    verdict = lln_overshoots(laplace, n_crossings=500, seed=seed, start=2.0, replicas=1, threads=1,
                             max_steps=10**7)
    batch = crossings(walk_stream(laplace, 2.0, RngState(seed, 0)), 500, 10**7)
    assert verdict.details["estimate"] == pytest.approx(np.mean([abs(e.overshoot) for e in batch]), rel=1e-12)
    assert verdict.streams == 1


def test_lln_laplace(laplace, seed):
    verdict = lln_overshoots(laplace, n_crossings=10_000, seed=seed, replicas=40, threads=4, max_steps=10**8)
    assert verdict.details["limit"] == pytest.approx(1.0)
    assert abs(verdict.details["estimate"] - 1.0) <= 5 * verdict.details["std_error"]
    assert verdict.passed


def test_lln_skewed_lattice(skewed_lattice, seed):
    verdict = lln_overshoots(skewed_lattice, n_crossings=20_000, seed=seed, replicas=20, threads=4,
                             max_steps=10**8)
    assert verdict.details["limit"] == pytest.approx(0.75)
    assert abs(verdict.details["estimate"] - 0.75) <= 5 * verdict.details["std_error"]


def test_clt_levelcrossings(laplace, seed):
    verdict = clt_levelcrossings(laplace, n=5_000, M=4_000, seed=seed, replicas=8, threads=4)
    assert verdict.statistic == "ks"
    assert verdict.sample_size == 4_000
    assert verdict.value < 0.1


def test_clt_does_not_depend_on_threads(laplace, seed):
    one = clt_levelcrossings(laplace, n=500, M=400, seed=seed, replicas=4, threads=1)
    three = clt_levelcrossings(laplace, n=500, M=400, seed=seed, replicas=4, threads=3)
    assert one.value == three.value


def test_clt_trend_structure(laplace, seed):
    verdict = clt_trend(laplace, horizons=(2_000, 500), M=2_000, seed=seed, replicas=4, threads=4)
    assert verdict.details["horizons"] == [500, 2_000]
    assert len(verdict.details["ks"]) == 2
    assert verdict.value >= 0.0
    assert verdict.threshold == pytest.approx(KS_CRITICAL / math.sqrt(2_000))
    with pytest.raises(ConfigurationError):
        clt_trend(laplace, horizons=(100,))


def test_perkins_sum(laplace, seed):
    verdict = perkins_sum(laplace, n=2_000, M=2_000, seed=seed, replicas=4, threads=4)
    assert verdict.value < 0.1
    assert verdict.details["sigma"] == pytest.approx(math.sqrt(2))
    assert verdict.details["fitted_sigma"] == pytest.approx(math.sqrt(2), rel=0.1)


def test_perkins_sum_is_scale_equivariant(seed):
    small = perkins_sum(LaplaceLaw(1.0), n=500, M=500, seed=seed, replicas=2, threads=1)
    large = perkins_sum(LaplaceLaw(2.0), n=500, M=500, seed=seed, replicas=2, threads=1)
    assert large.value == pytest.approx(small.value, abs=1e-12)


def test_limit_cdfs(laplace):
    cdf = clt_cdf(laplace)
    assert cdf(-1.0) == 0.0
    assert cdf(0.0) == 0.0
    assert float(cdf(np.inf)) == 1.0
    assert float(half_normal_cdf(2.0)(2.0)) == pytest.approx(0.6826894921370859)


def test_crossing_errors(laplace, drifting_lattice):
    with pytest.raises(CapabilityError):
        lln_overshoots(drifting_lattice, n_crossings=10)
    with pytest.raises(CapabilityError):
        clt_levelcrossings(drifting_lattice, n=10, M=10)
    with pytest.raises(CapabilityError):
        perkins_sum(ProductLaw([laplace, laplace]), n=10, M=10)
    with pytest.raises(ConfigurationError):
        lln_overshoots(laplace, n_crossings=0)
    with pytest.raises(ConfigurationError) as info:
        clt_levelcrossings(laplace, n=10, M=0)
    assert info.value.field == "M"
