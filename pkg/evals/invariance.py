"""
Invariance of the closed-form measures under the sampled chains.

Each sample starts from an independent draw of the target measure and is
pushed k steps through one of the chains:

- O: overshoots at up-crossings of zero (target pi_+)
- O_down: overshoots at down-crossings of zero (target pi_-)
- script_O: overshoots at every crossing of zero (target pi)
- entrance: entrance points into a set A (target normalized lambda_A^entr)
- U: undershoots at up-crossings of zero, started from stationary
  overshoots (target normalized exit density of the negative half-line)

The k-th value is compared with the target by KS distance (continuum laws)
or by multinomial bands on the atoms (lattice laws).
"""

import logging
import math
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from closed_form.densities import (
    DensityOnGroup,
    lambda_entr_density,
    lambda_exit_density,
    pi_density,
    pi_minus_density,
    pi_plus_density,
    sample_from,
)
from config import CYCLE_MAX_STEPS, DEFAULT_SEED, KS_CRITICAL, MAX_THREADS, MULTINOMIAL_SIGMAS, REPLICAS
from evals.summary import (
    EmpiricalSummary,
    TestVerdict,
    ecdf_frame,
    ks_distance,
    map_replicas,
    multinomial_verdict,
    split_counts,
)
from increments.laws import IncrementLaw
from increments.rng import RngState
from walks.cycles import StopRule, entrance_into, run_cycles, zero_crossing
from walks.sets import SetSpec
from utils.errors import CapabilityError, ConfigurationError

logger = logging.getLogger(__name__)


class ChainKind(str, Enum):
    O = "O"
    O_DOWN = "O_down"
    SCRIPT_O = "script_O"
    ENTRANCE = "entrance"
    U = "U"


def chain_target(law: IncrementLaw, chain: ChainKind,
                 A: Optional[SetSpec] = None) -> Tuple[DensityOnGroup, StopRule]:
    """Target measure of a chain and the stopping rule that advances it one step."""
    chain = ChainKind(chain)
    if law.dimension != 1:
        raise CapabilityError("invariance tests sample one-dimensional walks; "
                              "use hopf_ratio_test for higher dimensions")
    if chain is ChainKind.O:
        return pi_plus_density(law), entrance_into(SetSpec.half_line_nonneg())
    if chain is ChainKind.O_DOWN:
        return pi_minus_density(law), entrance_into(SetSpec.half_line_neg())
    if chain is ChainKind.SCRIPT_O:
        return pi_density(law), zero_crossing()
    if chain is ChainKind.U:
        return lambda_exit_density(law, SetSpec.half_line_nonneg()), entrance_into(SetSpec.half_line_nonneg())
    if A is None:
        raise ConfigurationError("the entrance chain needs a set A", field="set")
    return lambda_entr_density(law, A), entrance_into(A)


def _check_law(law: IncrementLaw):
    if not law.is_mean_zero:
        raise CapabilityError("target has infinite mass for a law with nonzero mean; use hopf_ratio_test")
    if not law.has_finite_variance:
        raise CapabilityError("infinite variance: the target is not a probability")


def _advance(law: IncrementLaw, density: DensityOnGroup, stop: StopRule, steps: int,
             max_steps: int, rng: RngState, size: int, undershoots: bool = False) -> Dict:
    x = sample_from(density, rng, size)
    truncated = np.zeros(size, dtype=bool)
    for _ in range(steps):
        result = run_cycles(law, x, rng, stop, max_steps=max_steps)
        x = result.final
        truncated |= result.truncated
    values = result.before if undershoots else x
    return {"values": values[~truncated], "truncated": int(truncated.sum())}


def invariance_test(law: IncrementLaw, chain: ChainKind = ChainKind.O, steps: int = 1, N: int = 10**5,
                    seed: int = DEFAULT_SEED, A: Optional[SetSpec] = None, replicas: int = REPLICAS,
                    threads: int = MAX_THREADS, max_steps: int = CYCLE_MAX_STEPS,
                    sigmas: float = MULTINOMIAL_SIGMAS) -> TestVerdict:
    """
    k-step invariance of the target measure under a sampled chain.

    Args:
        law: Mean-zero, finite-variance one-dimensional law
        chain: Which chain to sample
        steps: Number of chain steps k >= 1
        N: Number of independent samples
        seed: Root seed; replica i uses stream (seed, i)
        A: Set for the entrance chain

    Returns:
        TestVerdict (KS at KS_CRITICAL/sqrt(N), or multinomial bands)

    Raises:
        CapabilityError: if the target has infinite mass
    """
    if steps < 1:
        raise ConfigurationError("steps must be at least 1", field="steps")
    if N < 1:
        raise ConfigurationError("N must be positive", field="N")
    _check_law(law)
    chain = ChainKind(chain)
    density, stop = chain_target(law, chain, A)
    if not density.is_finite:
        raise CapabilityError(f"{density.name} has infinite mass; use hopf_ratio_test")
    undershoots = chain is ChainKind.U
    start = pi_plus_density(law) if undershoots else density

    parts = map_replicas(
        lambda rng, size: _advance(law, start, stop, steps, max_steps, rng, size, undershoots),
        seed, split_counts(N, replicas), threads, desc=f"{chain.value} x{steps}",
    )
    summary = EmpiricalSummary.merge_all([EmpiricalSummary(p["values"]) for p in parts])
    truncated = sum(p["truncated"] for p in parts)
    name = f"invariance[{chain.value},k={steps}]"
    details = {"chain": chain.value, "steps": steps, "truncated": truncated,
               "target_mass": density.total_mass}

    if density.is_lattice:
        points, masses = density.table
        verdict = multinomial_verdict(name, summary.values, points, masses / masses.sum(), seed,
                                      len(parts), sigmas=sigmas, target=density.name)
        h = density.lattice_span
        verdict.details["ks"] = ks_distance(summary, density.cdf, lambda x: density.cdf(x - h / 2))
    else:
        ks = ks_distance(summary, density.cdf)
        verdict = TestVerdict(name=name, statistic="ks", value=ks, threshold=KS_CRITICAL / math.sqrt(summary.count),
                              sample_size=summary.count, seed=seed, streams=len(parts), target=density.name,
                              frame=ecdf_frame(summary, density.cdf))
    verdict.partial = truncated > 0
    verdict.details.update(details)
    logger.info("%s: %s = %.6g (threshold %.6g)", name, verdict.statistic, verdict.value, verdict.threshold)
    return verdict


def invariance_propagation(law: IncrementLaw, chain: ChainKind = ChainKind.O, steps: Sequence[int] = (1, 2, 4),
                           N: int = 10**5, seed: int = DEFAULT_SEED, **kwargs) -> List[TestVerdict]:
    """The same invariance test after each number of steps; each k uses its own seed offset."""
    return [invariance_test(law, chain, k, N, seed + i, **kwargs) for i, k in enumerate(steps)]
