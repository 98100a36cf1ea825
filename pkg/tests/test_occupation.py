"""Occupation times and up-crossing counts over one crossing cycle."""

import math

import pytest

from evals.occupation import (
    OccupationVariant,
    StartKind,
    occupation_identity,
    occupation_identity_all,
    upcrossing_expectation,
    upcrossing_target,
)
from increments.laws import GaussianLaw, LaplaceLaw, UpwardExponentialLaw, simple_walk
from walks.sets import SetSpec
from utils.errors import CapabilityError, ConfigurationError

FAST = {"replicas": 8, "threads": 4, "max_steps": 10**5}


def within_five_se(verdict) -> bool:
    d = verdict.details
    return abs(d["estimate"] - d["target_value"]) <= 5 * d["std_error"]


@pytest.mark.parametrize("law, a, start, expected", [
    (LaplaceLaw(), 3.0, StartKind.PI_PLUS, 1.0),
    (LaplaceLaw(), -1.0, StartKind.PI_MINUS, 1.0),
    (simple_walk(), 4.0, StartKind.ZERO, 1.0),
    (LaplaceLaw(), 0.0, StartKind.ZERO, 1.0),
    (LaplaceLaw(), 1.0, StartKind.ZERO, 0.5 + math.exp(-1.0)),
    (UpwardExponentialLaw(0.25, 2.0), 0.5, StartKind.ZERO, 0.25 + math.exp(-1.0)),
])
def test_upcrossing_targets(law, a, start, expected):
    assert upcrossing_target(law, a, start) == pytest.approx(expected)


def test_upcrossing_targets_without_a_closed_form():
    with pytest.raises(CapabilityError):
        upcrossing_target(GaussianLaw(), 1.0, StartKind.ZERO)
    with pytest.raises(CapabilityError):
        upcrossing_target(LaplaceLaw(), -1.0, StartKind.ZERO)


@pytest.mark.parametrize("variant", list(OccupationVariant))
def test_occupation_of_the_origin_on_the_simple_walk(simple, seed, variant):
    verdict = occupation_identity(simple, SetSpec.box(0, 0), N_cycles=20_000, seed=seed, variant=variant,
                                  **FAST)
    assert verdict.details["target_value"] == pytest.approx(2.0)
    assert within_five_se(verdict), verdict.details


@pytest.mark.parametrize("b", range(-3, 4))
def test_occupation_of_every_site_near_the_origin(simple, seed, b):
    verdict = occupation_identity(simple, SetSpec.box(b, b), N_cycles=20_000, seed=seed + b + 3, **FAST)
    assert verdict.details["target_value"] == pytest.approx(2.0)
    assert within_five_se(verdict), (b, verdict.details)


def test_occupation_laplace(laplace, seed):
    verdict = occupation_identity(laplace, SetSpec.box(0, 1), N_cycles=20_000, seed=seed, **FAST)
    assert verdict.details["target_value"] == pytest.approx(2.0)
    assert within_five_se(verdict), verdict.details


def test_occupation_all_variants(skewed_lattice, seed):
    verdicts = occupation_identity_all(skewed_lattice, SetSpec.box(-1, 0), N_cycles=4_000, seed=seed, **FAST)
    assert [v.name for v in verdicts] == ["occupation[plus]", "occupation[minus]", "occupation[mixture]"]
    # c1 = 3/2 and two lattice points
    assert all(v.details["target_value"] == pytest.approx(3.0) for v in verdicts)


def test_upcrossings_from_zero_laplace(laplace, seed):
    verdict = upcrossing_expectation(laplace, 1.0, StartKind.ZERO, N=20_000, seed=seed, **FAST)
    assert verdict.details["target_value"] == pytest.approx(0.5 + math.exp(-1.0))
    assert within_five_se(verdict), verdict.details


def test_upcrossings_from_pi_plus(simple, seed):
    verdict = upcrossing_expectation(simple, 2.0, StartKind.PI_PLUS, N=20_000, seed=seed, **FAST)
    assert verdict.details["target_value"] == 1.0
    assert within_five_se(verdict), verdict.details


def test_skip_free_upcrossings_of_zero_count_once(skewed_lattice, seed):
    verdict = upcrossing_expectation(skewed_lattice, 0.0, StartKind.ZERO, N=2_000, seed=seed, **FAST)
    assert verdict.details["estimate"] == pytest.approx(1.0, abs=verdict.details["truncated"] / 2_000)


def test_occupation_errors(laplace, drifting_lattice):
    with pytest.raises(CapabilityError):
        occupation_identity(drifting_lattice, SetSpec.box(0, 1), N_cycles=10)
    with pytest.raises(ConfigurationError):
        occupation_identity(laplace, SetSpec.half_line_nonneg(), N_cycles=10)
    with pytest.raises(ConfigurationError):
        occupation_identity(laplace, SetSpec.box(0, 1), N_cycles=0)
    with pytest.raises(ConfigurationError):
        upcrossing_expectation(laplace, 1.0, N=0)
