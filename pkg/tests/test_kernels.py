"""First-passage linear algebra on finite chains."""

import json

import numpy as np
import pytest

from finite_chains.kernels import (
    FiniteChain,
    as_mask,
    derive_kernels,
    dual,
    entrance_exit_measures,
    entrance_kernel,
    exit_kernel,
    exit_states,
    induced_kernel,
    kac_lift,
    kac_lift_entrance,
    stationary,
)
from finite_chains.suite import neumann_entrance_kernel, neumann_induced_kernel
from utils.errors import ConfigurationError, DomainError, StructuralError

ABSORBING_COMPLEMENT = np.array([[0.5, 0.5], [0.0, 1.0]])


def test_stationary(small_chain):
    mu = stationary(small_chain.P)
    assert mu.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(mu @ small_chain.P, mu, atol=1e-14)
    np.testing.assert_allclose(stationary(np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], float)), [1 / 3] * 3)


def test_reducible_chain_names_its_classes(reducible_P):
    with pytest.raises(StructuralError, match="communicating classes"):
        stationary(reducible_P)


def test_cycle_kernels(cycle_chain):
    np.testing.assert_allclose(entrance_kernel(cycle_chain.P, cycle_chain.A), [[1, 0], [1, 0]])
    np.testing.assert_allclose(induced_kernel(cycle_chain.P, cycle_chain.A), [[0, 1], [1, 0]])
    np.testing.assert_allclose(kac_lift(cycle_chain.P, [0], [1.0]), [1, 1, 1])
    assert exit_states(cycle_chain.P, cycle_chain.A).tolist() == [2]
    np.testing.assert_allclose(exit_kernel(cycle_chain.P, cycle_chain.A), [[1.0]])


def test_dual_is_an_involution(small_chain):
    mu = small_chain.mu
    P_hat = dual(small_chain.P, mu)
    np.testing.assert_allclose(P_hat.sum(axis=1), 1.0, atol=1e-14)
    np.testing.assert_allclose(dual(P_hat, mu), small_chain.P, atol=1e-14)


def test_dual_needs_positive_mass(small_chain):
    with pytest.raises(DomainError):
        dual(small_chain.P, np.array([0.5, 0.5, 0.0, 0.0]))


def test_derived_kernels_are_stochastic(small_chain):
    k = derive_kernels(small_chain.P, small_chain.mu, small_chain.A)
    for K in (k.induced, k.entrance, k.exit):
        np.testing.assert_allclose(K.sum(axis=1), 1.0, atol=1e-12)
    assert k.idx_A.tolist() == [0, 2]
    assert k.idx_C.tolist() == [1, 3]


def test_kernels_match_the_neumann_series(small_chain):
    P, A = small_chain.P, small_chain.A
    np.testing.assert_allclose(induced_kernel(P, A), neumann_induced_kernel(P, A), atol=1e-12)
    np.testing.assert_allclose(entrance_kernel(P, A), neumann_entrance_kernel(P, A), atol=1e-12)


def test_entrance_and_exit_masses_agree(small_chain):
    P, mu, A = small_chain.P, small_chain.mu, small_chain.A
    measures = entrance_exit_measures(P, mu, A)
    assert measures.entrance.sum() == pytest.approx(measures.exit.sum(), abs=1e-14)
    np.testing.assert_allclose(measures.entrance, measures.entrance_cross, atol=1e-14)
    assert np.all(measures.entrance[~small_chain.A] == 0)
    assert np.all(measures.exit[small_chain.A] == 0)
    assert not measures.degenerate


def test_kac_lifts_reproduce_mu(small_chain):
    P, mu, A = small_chain.P, small_chain.mu, small_chain.A
    np.testing.assert_allclose(kac_lift(P, A, np.where(A, mu, 0.0)), mu, atol=1e-12)
    np.testing.assert_allclose(kac_lift_entrance(P, mu, A), mu, atol=1e-12)


def test_subset_errors(small_chain):
    with pytest.raises(DomainError):
        as_mask([0, 7], 4)
    with pytest.raises(DomainError):
        as_mask(np.array([True, False]), 4)
    with pytest.raises(DomainError):
        entrance_kernel(small_chain.P, [])
    with pytest.raises(DomainError):
        exit_kernel(small_chain.P, [0, 1, 2, 3])
    with pytest.raises(DomainError):
        kac_lift(small_chain.P, small_chain.A, [0.1, 0.2, 0.3, 0.4])


def test_absorbing_complement_is_structural():
    with pytest.raises(StructuralError, match="absorbing"):
        entrance_kernel(ABSORBING_COMPLEMENT, [0])
    with pytest.raises(StructuralError):
        induced_kernel(ABSORBING_COMPLEMENT, [0])


@pytest.mark.parametrize("P, field", [
    ([[0.5, 0.5]], "P"),
    ([[1.5, -0.5], [0.5, 0.5]], "P"),
    ([[0.5, 0.4], [0.5, 0.5]], "P"),
])
def test_chain_validation(P, field):
    with pytest.raises(ConfigurationError) as info:
        FiniteChain(np.array(P))
    assert info.value.field == field


def test_chain_needs_one_label_per_state():
    with pytest.raises(ConfigurationError) as info:
        FiniteChain(np.eye(2), ["only"])
    assert info.value.field == "states"


def test_chain_round_trip(small_chain, tmp_path):
    data = small_chain.to_dict()
    assert data["A"] == [0, 2]
    path = tmp_path / "four.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    loaded = FiniteChain.load(path)
    np.testing.assert_array_equal(loaded.P, small_chain.P)
    assert loaded.states == ["a", "b", "c", "d"]
    assert loaded.A.tolist() == [True, False, True, False]
    with pytest.raises(ConfigurationError):
        FiniteChain.from_dict({"states": ["a"]})
