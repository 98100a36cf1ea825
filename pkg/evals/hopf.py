"""
Ratio ergodic check of the entrance density.

Along recurrent paths, the counts of entrance points landing in B1 and B2
have ratio tending to lambda_A^entr(B1) / lambda_A^entr(B2), whether or not
the entrance measure is finite.
"""

import logging
import math
from typing import Dict

import numpy as np

from closed_form.densities import lambda_entr_density
from config import DEFAULT_SEED, HOPF_REL_TOL, MAX_STEPS, MAX_THREADS, REPLICAS
from evals.summary import TestVerdict, map_replicas, relative_error, split_counts
from increments.laws import IncrementLaw
from increments.rng import RngState
from walks.engine import entrance_exit_events, walk_stream
from walks.sets import SetSpec
from utils.errors import CapabilityError, ConfigurationError, DomainError

logger = logging.getLogger(__name__)


def hopf_ratio_test(law: IncrementLaw, A: SetSpec, B1: SetSpec, B2: SetSpec, n_events: int = 10**5,
                    seed: int = DEFAULT_SEED, start=None, replicas: int = REPLICAS, threads: int = MAX_THREADS,
                    max_steps: int = MAX_STEPS) -> TestVerdict:
    """
    Entrance-position ratio against the closed-form ratio of entrance masses.

    Args:
        law: Mean-zero finite-variance law in dimension 1 or 2
        A: Target set of the entrances
        B1, B2: Bounded subsets of A
        n_events: Entrance events, split over independent paths
        start: Starting point (origin by default)

    Returns:
        TestVerdict on the relative error; asserted only in dimension 1

    Raises:
        DomainError: if lambda_A^entr(B2) = 0
    """
    if law.dimension > 2:
        raise CapabilityError("entrance ratios are checked only in the recurrent dimensions 1 and 2")
    if not law.is_mean_zero:
        raise CapabilityError("entrance ratios need a recurrent (mean-zero) walk")
    for name, B in (("B1", B1), ("B2", B2)):
        if B.dimension != law.dimension or not B.is_bounded:
            raise ConfigurationError(f"{name} must be a bounded {law.dimension}-d set", field=name)
    if n_events < 1:
        raise ConfigurationError("n_events must be positive", field="n_events")

    density = lambda_entr_density(law, A)
    mass1, mass2 = density.mass(B1), density.mass(B2)
    if mass2 <= 0:
        raise DomainError(f"lambda_A^entr(B2) = {mass2}: B2 carries no entrance mass, ratio undefined")
    target = mass1 / mass2
    origin = 0.0 if law.dimension == 1 else np.zeros(law.dimension)
    start = origin if start is None else start
    per_path_budget = max(1, max_steps // max(1, replicas))

    def task(rng: RngState, size: int) -> Dict:
        if size == 0:
            return {"in_B1": 0, "in_B2": 0, "events": 0, "exhausted": False}
        batch = entrance_exit_events(walk_stream(law, start, rng), A, size, per_path_budget)
        points = np.array([e.entrance_point for e in batch], dtype=np.float64)
        if points.size == 0:
            return {"in_B1": 0, "in_B2": 0, "events": 0, "exhausted": batch.budget_exhausted}
        return {
            "in_B1": int(np.count_nonzero(B1.contains(points))),
            "in_B2": int(np.count_nonzero(B2.contains(points))),
            "events": len(batch),
            "exhausted": batch.budget_exhausted,
        }

    parts = map_replicas(task, seed, split_counts(n_events, replicas), threads, desc="Entrance paths")
    in_B1 = sum(p["in_B1"] for p in parts)
    in_B2 = sum(p["in_B2"] for p in parts)
    ratio = in_B1 / in_B2 if in_B2 else math.inf
    asserted = law.dimension == 1
    if not asserted:
        logger.info("entrance ratio in dimension %d is reported, not asserted", law.dimension)
    return TestVerdict(
        name="hopf_ratio", statistic="relative_error",
        value=relative_error(ratio, target) if math.isfinite(ratio) else math.inf,
        threshold=HOPF_REL_TOL, sample_size=sum(p["events"] for p in parts), seed=seed, streams=len(parts),
        partial=any(p["exhausted"] for p in parts), asserted=asserted, target="λ_A^entr(B1)/λ_A^entr(B2)",
        details={"ratio": ratio, "target_ratio": target, "in_B1": in_B1, "in_B2": in_B2,
                 "mass_B1": mass1, "mass_B2": mass2},
    )
