"""
Expected occupation times and up-crossing counts between level crossings.

Cycles start from fresh draws of pi_+, pi_- or pi (or from zero) and run to
the first crossing of zero that closes them. The mean of the per-cycle
count is compared with its closed form.
"""

import logging
import math
from enum import Enum
from typing import Dict, List

import numpy as np

from closed_form.densities import pi_density, pi_minus_density, pi_plus_density, sample_from
from config import (
    CYCLE_MAX_STEPS,
    DEFAULT_SEED,
    MAX_THREADS,
    OCCUPATION_REL_TOL,
    REPLICAS,
    UPCROSSING_REL_TOL,
)
from evals.summary import EmpiricalSummary, TestVerdict, map_replicas, relative_error, split_counts
from increments.laws import IncrementLaw
from increments.rng import RngState
from walks.cycles import Observer, StopRule, entrance_into, occupation_of, run_cycles, upcrossings_of, zero_crossing
from walks.sets import SetSpec
from utils.errors import CapabilityError, ConfigurationError

logger = logging.getLogger(__name__)


class OccupationVariant(str, Enum):
    PLUS = "plus"          # pi_+ starts, cycle ends at the first up-crossing
    MINUS = "minus"        # pi_- starts, first down-crossing
    MIXTURE = "mixture"    # pi starts, first crossing either way; counts doubled


class StartKind(str, Enum):
    PI_PLUS = "pi_plus"
    PI_MINUS = "pi_minus"
    ZERO = "zero"


def _require_recurrent_1d(law: IncrementLaw):
    if law.dimension != 1:
        raise CapabilityError("occupation identities are stated for one-dimensional walks")
    if not law.is_mean_zero:
        raise CapabilityError("occupation identities need a mean-zero law")


def _cycle_mean(law: IncrementLaw, starts_of, stop: StopRule, observer: Observer, N: int, seed: int,
                replicas: int, threads: int, max_steps: int, desc: str) -> Dict:
    """Mean per-cycle count over N cycles; truncated cycles keep their partial counts."""

    def task(rng: RngState, size: int) -> Dict:
        if size == 0:
            return {"counts": np.empty(0), "truncated": 0}
        result = run_cycles(law, starts_of(rng, size), rng, stop, {"count": observer}, max_steps=max_steps)
        return {"counts": result.totals["count"].astype(np.float64), "truncated": result.n_truncated}

    parts = map_replicas(task, seed, split_counts(N, replicas), threads, desc=desc)
    summary = EmpiricalSummary.merge_all([EmpiricalSummary(p["counts"]) for p in parts])
    return {"summary": summary, "truncated": sum(p["truncated"] for p in parts), "streams": len(parts)}


def _variant_setup(law: IncrementLaw, variant: OccupationVariant):
    if variant is OccupationVariant.PLUS:
        return pi_plus_density(law), entrance_into(SetSpec.half_line_nonneg()), 1.0
    if variant is OccupationVariant.MINUS:
        return pi_minus_density(law), entrance_into(SetSpec.half_line_neg()), 1.0
    return pi_density(law), zero_crossing(), 2.0


def occupation_identity(law: IncrementLaw, B: SetSpec, N_cycles: int = 10**6, seed: int = DEFAULT_SEED,
                        variant: OccupationVariant = OccupationVariant.PLUS, replicas: int = REPLICAS,
                        threads: int = MAX_THREADS, max_steps: int = CYCLE_MAX_STEPS) -> TestVerdict:
    """
    Mean occupation of B per cycle against c1 * lambda(B).

    Args:
        law: Mean-zero one-dimensional law with finite E|X_1|
        B: Bounded one-dimensional set
        N_cycles: Number of cycles
        variant: Start measure and closing crossing (see OccupationVariant)

    Returns:
        TestVerdict on the relative error
    """
    _require_recurrent_1d(law)
    variant = OccupationVariant(variant)
    if B.dimension != 1 or not B.is_bounded:
        raise ConfigurationError("B must be a bounded one-dimensional set", field="set")
    if N_cycles < 1:
        raise ConfigurationError("N_cycles must be positive", field="N_cycles")
    density, stop, factor = _variant_setup(law, variant)
    target = law.moments().c1 * B.haar_measure(law.lattice_span)

    run = _cycle_mean(law, lambda rng, size: sample_from(density, rng, size), stop, occupation_of(B),
                      N_cycles, seed, replicas, threads, max_steps, desc=f"Occupation {variant.value}")
    summary = run["summary"]
    estimate = factor * summary.mean
    return TestVerdict(
        name=f"occupation[{variant.value}]", statistic="relative_error",
        value=relative_error(estimate, target), threshold=OCCUPATION_REL_TOL,
        sample_size=summary.count, seed=seed, streams=run["streams"], partial=run["truncated"] > 0,
        target="c1·λ(B)",
        details={"estimate": estimate, "target_value": target, "std_error": factor * summary.std_error,
                 "truncated": run["truncated"], "set": B.describe()},
    )


def occupation_identity_all(law: IncrementLaw, B: SetSpec, N_cycles: int = 10**6, seed: int = DEFAULT_SEED,
                            **kwargs) -> List[TestVerdict]:
    """All three variants, one verdict each; variant i runs with seed + i."""
    return [occupation_identity(law, B, N_cycles, seed + i, variant, **kwargs)
            for i, variant in enumerate(OccupationVariant)]


def upcrossing_target(law: IncrementLaw, a: float, start: StartKind) -> float:
    """
    Closed-form E L_T^up(a).

    Level-independent value 1 under pi_+ or pi_-; from zero, 1 for upward
    skip-free laws and P(X>0)/P(X!=0) + P(X>=a | X>0) for upward-exponential
    laws with a > 0.
    """
    start = StartKind(start)
    if start is not StartKind.ZERO:
        return 1.0
    if law.upward_skip_free:
        return 1.0
    if a == 0:
        return 1.0
    expo = law.upward_exponential
    if expo is None:
        raise CapabilityError("no closed form for E_0 L_T^up(a): law is neither upward skip-free "
                              "nor upward exponential")
    if a < 0:
        raise CapabilityError("the upward-exponential closed form holds for levels a > 0")
    p_up, rate = expo
    nonzero = 1.0 - float(law.point_mass(0.0))
    return p_up / nonzero + math.exp(-rate * a)


def upcrossing_expectation(law: IncrementLaw, a: float, start: StartKind = StartKind.PI_PLUS, N: int = 10**6,
                           seed: int = DEFAULT_SEED, replicas: int = REPLICAS, threads: int = MAX_THREADS,
                           max_steps: int = CYCLE_MAX_STEPS, rel_tol: float = UPCROSSING_REL_TOL) -> TestVerdict:
    """Mean number of up-crossings of level a before the first up-crossing of zero."""
    _require_recurrent_1d(law)
    if law.moments().second_moment <= 0:
        raise CapabilityError("degenerate law")
    start = StartKind(start)
    if N < 1:
        raise ConfigurationError("N must be positive", field="N")
    target = upcrossing_target(law, a, start)

    if start is StartKind.ZERO:
        starts_of = lambda rng, size: np.zeros(size)
    else:
        density = pi_plus_density(law) if start is StartKind.PI_PLUS else pi_minus_density(law)
        starts_of = lambda rng, size: sample_from(density, rng, size)

    run = _cycle_mean(law, starts_of, entrance_into(SetSpec.half_line_nonneg()), upcrossings_of(a),
                      N, seed, replicas, threads, max_steps, desc=f"Up-crossings a={a}")
    summary = run["summary"]
    return TestVerdict(
        name=f"upcrossings[a={a},start={start.value}]", statistic="relative_error",
        value=relative_error(summary.mean, target), threshold=rel_tol,
        sample_size=summary.count, seed=seed, streams=run["streams"], partial=run["truncated"] > 0,
        target="E L_T↑(a)",
        details={"estimate": summary.mean, "target_value": target, "std_error": summary.std_error,
                 "truncated": run["truncated"], "level": a, "start": start.value},
    )
