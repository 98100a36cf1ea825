"""Increment laws, exact parsing and random streams."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from increments.laws import (
    Family,
    GaussianLaw,
    IncrementLaw,
    LaplaceLaw,
    LatticeLaw,
    ProductLaw,
    UniformLaw,
    UpwardExponentialLaw,
    law_from_spec,
    simple_walk,
)
from increments.rng import RngState, replica_streams
from utils.errors import CapabilityError, ConfigurationError
from utils.parsing import parse_exact


# ---------------------------------------------------------------------- #
# Exact parsing
# ---------------------------------------------------------------------- #
@pytest.mark.parametrize("text, expected", [
    ("2/3", Fraction(2, 3)),
    ("0.25", Fraction(1, 4)),
    ("-1e-3", Fraction(-1, 1000)),
    (" 7 / 14 ", Fraction(1, 2)),
    (3, Fraction(3)),
    (0.5, Fraction(1, 2)),
])
def test_parse_exact(text, expected):
    assert parse_exact(text) == expected


@pytest.mark.parametrize("bad", ["abc", "1/0", "", True, None])
def test_parse_exact_rejects(bad):
    with pytest.raises(ConfigurationError):
        parse_exact(bad)


# ---------------------------------------------------------------------- #
# Lattice laws
# ---------------------------------------------------------------------- #
def test_lattice_moments_are_exact(skewed_lattice):
    m = skewed_lattice.moments()
    assert m.mean == 0.0
    assert m.abs_mean == pytest.approx(4 / 3, abs=1e-15)
    assert m.second_moment == pytest.approx(2.0, abs=1e-15)
    assert m.c1 == pytest.approx(1.5, abs=1e-15)
    assert skewed_lattice.is_mean_zero
    assert skewed_lattice.lattice_span == 1.0


def test_lattice_span_is_the_gcd():
    law = LatticeLaw([("0.5", "1/2"), ("-1.5", "1/6"), ("0.5", "1/3")])
    assert law.lattice_span == 0.5
    assert law.support.tolist() == [-1.5, 0.5]
    assert law.weights.tolist() == pytest.approx([1 / 6, 5 / 6])


def test_lattice_tails(skewed_lattice):
    law = skewed_lattice
    assert law.tail_low(-2.0) == pytest.approx(1 / 3)
    assert law.tail_low(-1.5) == pytest.approx(1 / 3)
    assert law.tail_low(-2.5) == 0.0
    assert law.tail_low(1.0) == 1.0
    assert law.tail_up(0.0) == pytest.approx(2 / 3)
    assert law.prob_below(1.0) == pytest.approx(1 / 3)
    assert law.point_mass(1.0) == pytest.approx(2 / 3)
    assert law.point_mass(0.5) == 0.0
    assert law.support_bounds() == (-2.0, 1.0)


def test_lattice_integrated_tails(skewed_lattice):
    law = skewed_lattice
    assert law.integrated_tail_up(0.5)[0] == pytest.approx(1 / 3)
    assert law.integrated_tail_up(2.0)[0] == pytest.approx(2 / 3)
    assert law.integrated_tail_up(math.inf)[0] == pytest.approx(law.positive_part_mean())
    assert law.integrated_tail_low(-1.0)[0] == pytest.approx(1 / 3)
    assert law.integrated_tail_low(-3.0)[0] == pytest.approx(2 / 3)
    assert law.negative_part_mean() == pytest.approx(2 / 3)


def test_upward_skip_free(skewed_lattice):
    assert skewed_lattice.upward_skip_free
    assert simple_walk().upward_skip_free
    assert not LatticeLaw([("2", "1/3"), ("-1", "2/3")]).upward_skip_free
    assert not LaplaceLaw().upward_skip_free


@pytest.mark.parametrize("pmf, match", [
    ([("1", "1/2"), ("-1", "1/4")], "sum to"),
    ([("1", "-1/2"), ("-1", "3/2")], "negative weight"),
    ([("0", "1")], "degenerate"),
    ([("1", "0")], "no positive weights"),
])
def test_lattice_rejects_bad_pmf(pmf, match):
    with pytest.raises(ConfigurationError, match=match) as info:
        LatticeLaw(pmf)
    assert info.value.field == "params.pmf"


def test_declared_mean_zero_is_checked():
    with pytest.raises(ConfigurationError, match="mean-zero"):
        LatticeLaw([("1", "1/2"), ("-2", "1/2")], params={"mean_zero": True})


def test_drift_is_detected(drifting_lattice):
    assert not drifting_lattice.is_mean_zero
    assert drifting_lattice.moments().mean == pytest.approx(0.25)


def test_to_units_rejects_points_off_the_lattice(simple):
    assert simple.to_units(np.array([3.0, -2.0])).tolist() == [3, -2]
    with pytest.raises(ConfigurationError) as info:
        simple.to_units(0.5)
    assert info.value.field == "start"


# ---------------------------------------------------------------------- #
# Continuum laws
# ---------------------------------------------------------------------- #
def test_laplace_tails_and_moments(laplace):
    assert laplace.tail_up(1.0) == pytest.approx(0.5 * math.exp(-1.0))
    assert laplace.tail_low(-2.0) == pytest.approx(0.5 * math.exp(-2.0))
    m = laplace.moments()
    assert (m.mean, m.abs_mean, m.second_moment) == (0.0, 1.0, 2.0)
    assert laplace.upward_exponential == (0.5, 1.0)


def test_upward_exponential_mix_is_mean_zero():
    law = UpwardExponentialLaw(p_up=0.25, rate_up=2.0)
    assert law.rate_down == pytest.approx(6.0)
    assert law.moments().mean == 0.0
    assert law.moments().abs_mean == pytest.approx(0.25)
    # the distribution function is continuous at zero
    assert law.tail_low(0.0) == pytest.approx(0.75)
    assert law.tail_low(-1e-12) == pytest.approx(0.75)


@pytest.mark.parametrize("law, abs_mean, second", [
    (GaussianLaw(), math.sqrt(2 / math.pi), 1.0),
    (GaussianLaw(2.0), 2 * math.sqrt(2 / math.pi), 4.0),
    (UniformLaw(1.0), 0.5, 1 / 3),
    (LaplaceLaw(0.5), 0.5, 0.5),
])
def test_continuum_moments(law, abs_mean, second):
    m = law.moments()
    assert m.abs_mean == pytest.approx(abs_mean)
    assert m.second_moment == pytest.approx(second)


@pytest.mark.parametrize("law", [LaplaceLaw(), GaussianLaw(), UniformLaw(2.0),
                                 UpwardExponentialLaw(0.3, 1.5)])
@given(x=st.floats(min_value=-20, max_value=20, allow_nan=False))
@settings(max_examples=60, deadline=None)
def test_tails_are_complementary(law, x):
    low, up = float(law.tail_low(x)), float(law.tail_up(x))
    assert 0.0 <= low <= 1.0
    assert low + up == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("law", [LaplaceLaw(), GaussianLaw(), UniformLaw(1.0), UpwardExponentialLaw(0.4, 2.0)])
def test_closed_form_integrated_tails_match_quadrature(law):
    xs = np.array([0.3, 1.0, 4.0])
    np.testing.assert_allclose(law.integrated_tail_up(xs), IncrementLaw.integrated_tail_up(law, xs), atol=1e-9)
    np.testing.assert_allclose(law.integrated_tail_low(-xs), IncrementLaw.integrated_tail_low(law, -xs), atol=1e-9)


def test_sample_mean_is_near_zero(skewed_lattice):
    draws = skewed_lattice.sample(RngState(7), 200_000)
    assert set(np.unique(draws)) == {-2.0, 1.0}
    assert abs(draws.mean()) < 0.02


# ---------------------------------------------------------------------- #
# Factory and products
# ---------------------------------------------------------------------- #
def test_law_from_spec_families():
    assert isinstance(law_from_spec({"family": "laplace_unit"}), LaplaceLaw)
    assert isinstance(law_from_spec({"family": "gaussian_std", "params": {"scale": 2}}), GaussianLaw)
    assert isinstance(law_from_spec({"family": "uniform_symmetric"}), UniformLaw)
    lattice = law_from_spec({"family": "lattice_pmf", "params": {"pmf": [["1", "1/2"], ["-1", "1/2"]]}})
    assert lattice.family is Family.LATTICE_PMF


@pytest.mark.parametrize("spec, field", [
    ({"family": "cauchy"}, "law.family"),
    ({"family": "lattice_pmf"}, "law.params.pmf"),
    ({"family": "laplace_unit", "params": {"rate": 2}}, "law.params"),
    ("laplace_unit", "law"),
])
def test_law_from_spec_errors_name_the_field(spec, field):
    with pytest.raises(ConfigurationError) as info:
        law_from_spec(spec)
    assert info.value.field == field


def test_product_law():
    law = law_from_spec({"family": "product_of_1d", "params": {"components": [
        {"family": "lattice_pmf", "params": {"pmf": [["1", "1/2"], ["-1", "1/2"]]}},
        {"family": "lattice_pmf", "params": {"pmf": [["1", "1/2"], ["-1", "1/2"]]}},
    ]}})
    assert law.dimension == 2
    assert law.is_mean_zero
    assert law.tail_low(np.array([0.0, 0.0])) == pytest.approx(0.25)
    assert law.sample(RngState(1), 5).shape == (5, 2)
    with pytest.raises(CapabilityError):
        law.moments()


def test_product_law_needs_a_common_span():
    with pytest.raises(ConfigurationError):
        ProductLaw([simple_walk(), LaplaceLaw()])
    with pytest.raises(ConfigurationError):
        ProductLaw([simple_walk()])


# ---------------------------------------------------------------------- #
# Random streams
# ---------------------------------------------------------------------- #
def test_streams_are_keyed_by_seed_and_stream_id():
    a, b = RngState(11, 3), RngState(11, 3)
    np.testing.assert_array_equal(a.uniform(10), b.uniform(10))
    assert not np.array_equal(RngState(11, 3).uniform(10), RngState(11, 4).uniform(10))
    assert not np.array_equal(RngState(11, 3).uniform(10), RngState(12, 3).uniform(10))
    assert RngState(11, 3).derive(5).manifest == {"seed": 11, "stream_id": 5}


def test_replica_streams():
    streams = replica_streams(9, 4, offset=2)
    assert [s.stream_id for s in streams] == [2, 3, 4, 5]
    assert all(s.seed == 9 for s in streams)


@pytest.mark.parametrize("seed, stream_id", [(-1, 0), (2**64, 0), (0, -1)])
def test_stream_keys_must_be_unsigned_64_bit(seed, stream_id):
    with pytest.raises(ConfigurationError):
        RngState(seed, stream_id)
