"""Shared pytest fixtures: laws, chains and seeds used across the test modules."""

import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent
sys.path.insert(0, str(ROOT))

from finite_chains.kernels import FiniteChain  # noqa: E402
from increments.laws import LaplaceLaw, LatticeLaw, simple_walk  # noqa: E402


@pytest.fixture
def simple():
    return simple_walk()


@pytest.fixture
def laplace():
    return LaplaceLaw()


@pytest.fixture
def skewed_lattice():
    """+1 w.p. 2/3, -2 w.p. 1/3: mean zero, upward skip-free."""
    return LatticeLaw([("1", "2/3"), ("-2", "1/3")])


@pytest.fixture
def drifting_lattice():
    return LatticeLaw([("1", "1/2"), ("0", "1/4"), ("-1", "1/4")])


@pytest.fixture
def small_chain():
    P = np.array([
        [0.1, 0.4, 0.3, 0.2],
        [0.5, 0.0, 0.25, 0.25],
        [0.2, 0.2, 0.2, 0.4],
        [0.0, 0.6, 0.4, 0.0],
    ])
    return FiniteChain(P, ["a", "b", "c", "d"], [0, 2], name="four_state")


@pytest.fixture
def cycle_chain():
    return FiniteChain(np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=float), A=[0, 1], name="cycle")


@pytest.fixture
def reducible_P():
    return np.array([[0.5, 0.5, 0, 0], [0.5, 0.5, 0, 0], [0, 0, 0.5, 0.5], [0, 0, 0.5, 0.5]])


@pytest.fixture
def seed():
    return 20240607


@pytest.fixture
def experiments_dir():
    return ROOT / "experiments"
