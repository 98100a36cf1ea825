"""Closed-form densities, their masses, moments and samplers."""

import math

import numpy as np
import pytest

from closed_form.densities import (
    abs_first_moment_pi,
    first_moment_check,
    lambda_entr_density,
    lambda_exit_density,
    pi_density,
    pi_minus_density,
    pi_plus_density,
    sample_from,
)
from evals.summary import EmpiricalSummary, ks_distance
from increments.laws import GaussianLaw, LaplaceLaw, ProductLaw, UniformLaw, UpwardExponentialLaw, simple_walk
from increments.rng import RngState
from walks.sets import SetSpec
from utils.errors import CapabilityError, ConfigurationError

E = math.e


# ---------------------------------------------------------------------- #
# Lattice tables
# ---------------------------------------------------------------------- #
def test_pi_on_a_skewed_lattice(skewed_lattice):
    weights = pi_density(skewed_lattice).weights()
    assert weights == pytest.approx({-2.0: 0.25, -1.0: 0.25, 0.0: 0.5})
    assert pi_density(skewed_lattice).total_mass == pytest.approx(1.0)


def test_pi_plus_and_minus_on_a_skewed_lattice(skewed_lattice):
    assert pi_plus_density(skewed_lattice).weights() == pytest.approx({0.0: 1.0})
    assert pi_minus_density(skewed_lattice).weights() == pytest.approx({-2.0: 0.5, -1.0: 0.5})


def test_exit_density_of_a_skip_free_walk(skewed_lattice):
    density = lambda_exit_density(skewed_lattice, SetSpec.half_line_nonneg())
    assert density.weights() == pytest.approx({-1.0: 2 / 3})


def test_lattice_mass_and_cdf(skewed_lattice):
    pi = pi_density(skewed_lattice)
    assert pi.mass(SetSpec.box(-1, 0)) == pytest.approx(0.75)
    assert pi.mass(SetSpec.lattice_mask([[-2]])) == pytest.approx(0.25)
    assert pi.cdf(-1.5) == pytest.approx(0.25)
    assert pi.cdf(0.0) == pytest.approx(1.0)


def test_lattice_sampling_matches_the_table(skewed_lattice):
    draws = sample_from(pi_density(skewed_lattice), RngState(1), 60_000)
    values, counts = np.unique(draws, return_counts=True)
    assert values.tolist() == [-2.0, -1.0, 0.0]
    np.testing.assert_allclose(counts / draws.size, [0.25, 0.25, 0.5], atol=0.01)


# ---------------------------------------------------------------------- #
# Continuum densities
# ---------------------------------------------------------------------- #
def test_laplace_pi_plus(laplace):
    density = pi_plus_density(laplace)
    assert density(1.0) == pytest.approx(math.exp(-1.0))
    assert density(-1.0) == 0.0
    assert density.total_mass == pytest.approx(1.0, abs=1e-10)
    assert density.cdf(1.0) == pytest.approx(1 - math.exp(-1.0), abs=1e-10)


def test_laplace_pi_is_the_laplace_density(laplace):
    density = pi_density(laplace)
    xs = np.array([-2.0, -0.5, 0.0, 0.7, 3.0])
    np.testing.assert_allclose(density(xs), 0.5 * np.exp(-np.abs(xs)), rtol=1e-12)


def test_entrance_density_of_a_box(laplace):
    density = lambda_entr_density(laplace, SetSpec.box(0, 1))
    assert density.total_mass == pytest.approx(1 - 1 / E, abs=1e-9)
    assert density.quad_integrate() == pytest.approx(density.total_mass, abs=1e-8)
    assert density(0.5) == pytest.approx(math.exp(-0.5))


def test_entrance_masses_give_the_ratio_target(laplace):
    density = lambda_entr_density(laplace, SetSpec.half_line_nonneg())
    m1 = density.mass(SetSpec.box(0, 1))
    m2 = density.mass(SetSpec.box(1, 2))
    assert m1 / m2 == pytest.approx((1 - 1 / E) / (1 / E - 1 / E ** 2), rel=1e-10)


def test_exit_density_of_the_negative_half_line(laplace):
    density = lambda_exit_density(laplace, SetSpec.half_line_nonneg())
    assert density(-1.0) == pytest.approx(0.5 * math.exp(-1.0))
    assert density(1.0) == 0.0
    assert density.total_mass == pytest.approx(0.5, abs=1e-10)
    assert density.cdf(-1.0) == pytest.approx(math.exp(-1.0), abs=1e-10)


def test_continuum_sampling(laplace):
    density = pi_plus_density(laplace)
    n = 20_000
    sample = EmpiricalSummary(sample_from(density, RngState(2), n))
    assert sample.values.min() >= 0
    assert ks_distance(sample, density.cdf) <= 3.0 / math.sqrt(n)


def test_to_frame(laplace):
    frame = pi_density(laplace).to_frame(np.linspace(-1, 1, 5))
    assert list(frame.columns) == ["x", "density"]
    assert len(frame) == 5


# ---------------------------------------------------------------------- #
# First moment of pi
# ---------------------------------------------------------------------- #
@pytest.mark.parametrize("law, expected", [
    (simple_walk(), 0.5),
    (LaplaceLaw(), 1.0),
    (GaussianLaw(), math.sqrt(math.pi / 8)),
    (UniformLaw(1.0), 1 / 3),
    (UpwardExponentialLaw(0.25, 2.0), 1 / 3),
])
def test_first_moment_routes_agree(law, expected):
    routes = first_moment_check(law)
    assert routes["moment_formula"] == pytest.approx(expected, rel=1e-12)
    assert routes["integral_forms"] == pytest.approx(expected, rel=1e-7)
    assert routes["direct"] == pytest.approx(expected, rel=1e-7)
    assert abs_first_moment_pi(law) == pytest.approx(expected)


def test_first_moment_on_the_skewed_lattice(skewed_lattice):
    assert abs_first_moment_pi(skewed_lattice) == pytest.approx(0.75)


def test_first_moment_needs_mean_zero(drifting_lattice):
    with pytest.raises(CapabilityError):
        first_moment_check(drifting_lattice)


# ---------------------------------------------------------------------- #
# Two dimensions and unsupported requests
# ---------------------------------------------------------------------- #
def test_two_dimensional_densities():
    law = ProductLaw([simple_walk(), simple_walk()])
    plus = pi_plus_density(law)
    assert plus(np.array([0.0, 0.0])) == pytest.approx(0.75)
    assert plus(np.array([-1.0, 0.0])) == 0.0
    assert not plus.is_finite
    box = lambda_entr_density(law, SetSpec.box([0, 0], [1, 1]))
    assert box.total_mass == pytest.approx(3.0)
    with pytest.raises(CapabilityError):
        sample_from(plus, RngState(1), 10)
    with pytest.raises(CapabilityError):
        pi_density(law)


def test_unsupported_requests(laplace):
    with pytest.raises(CapabilityError):
        lambda_entr_density(laplace, SetSpec.lattice_mask([[1]]))
    with pytest.raises(ConfigurationError):
        lambda_entr_density(laplace, SetSpec.orthant_nonneg(2))
    with pytest.raises(CapabilityError):
        lambda_entr_density(laplace, SetSpec.half_line_nonneg()).table
