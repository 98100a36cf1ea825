"""Entrance-position ratios along recurrent paths."""

import math

import pytest

from evals.hopf import hopf_ratio_test
from increments.laws import ProductLaw
from walks.sets import SetSpec
from utils.errors import CapabilityError, ConfigurationError, DomainError

NONNEG = SetSpec.half_line_nonneg()


def test_laplace_entrance_ratio(laplace, seed):
    verdict = hopf_ratio_test(laplace, NONNEG, SetSpec.box(0, 1), SetSpec.box(1, 2), n_events=12_800,
                              seed=seed, replicas=64, threads=4, max_steps=10**9)
    e = math.e
    assert verdict.details["target_ratio"] == pytest.approx((1 - 1 / e) / (1 / e - 1 / e ** 2))
    assert verdict.sample_size == 12_800
    assert verdict.passed, verdict.details
    assert not verdict.partial


def test_two_dimensional_ratio_is_reported_not_asserted(simple, seed):
    law = ProductLaw([simple, simple])
    verdict = hopf_ratio_test(law, SetSpec.orthant_nonneg(2), SetSpec.box([0, 0], [1, 1]),
                              SetSpec.box([0, 0], [0, 0]), n_events=200, seed=seed, replicas=4, threads=2,
                              max_steps=10**6)
    # masses 3/4 + 1/2 + 1/2 + 0 against 3/4
    assert verdict.details["target_ratio"] == pytest.approx(7 / 3)
    assert not verdict.asserted
    assert verdict.passed


def test_hopf_errors(laplace, drifting_lattice, simple):
    with pytest.raises(DomainError):
        hopf_ratio_test(laplace, NONNEG, SetSpec.box(0, 1), SetSpec.box(-2, -1), n_events=10)
    with pytest.raises(CapabilityError):
        hopf_ratio_test(drifting_lattice, NONNEG, SetSpec.box(0, 1), SetSpec.box(1, 2), n_events=10)
    with pytest.raises(CapabilityError):
        hopf_ratio_test(ProductLaw([simple] * 3), SetSpec.orthant_nonneg(3),
                        SetSpec.box([0] * 3, [1] * 3), SetSpec.box([0] * 3, [0] * 3), n_events=10)
    with pytest.raises(ConfigurationError) as info:
        hopf_ratio_test(laplace, NONNEG, NONNEG, SetSpec.box(1, 2), n_events=10)
    assert info.value.field == "B1"
