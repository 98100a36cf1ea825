"""
Ergodic and limit theorems for zero-level crossings.

- lln_overshoots: average |overshoot| along crossing paths -> sigma^2/(2E|X_1|)
- clt_levelcrossings: L_n/sqrt(n) -> law with CDF 2 Phi(sigma y/(2E|X_1|)) - 1
- perkins_sum: n^{-1/2} sum_{k<=L_n} |O_k| -> sigma |N(0, 1)|
"""

import logging
import math
from typing import Dict, List, Sequence

import numpy as np
from scipy.stats import norm

from closed_form.densities import abs_first_moment_pi
from config import (
    CLT_KS_THRESHOLD,
    DEFAULT_SEED,
    KS_CRITICAL,
    LLN_REL_TOL,
    MAX_STEPS,
    MAX_THREADS,
    PERKINS_KS_THRESHOLD,
    REPLICAS,
)
from evals.summary import (
    EmpiricalSummary,
    TestVerdict,
    ecdf_frame,
    ks_distance,
    map_replicas,
    relative_error,
    split_counts,
)
from increments.laws import IncrementLaw
from increments.rng import RngState
from walks.cycles import horizon_crossings
from walks.engine import crossings, walk_stream
from utils.errors import CapabilityError, ConfigurationError

logger = logging.getLogger(__name__)

CLT_TARGET = "2Φ(σy/(2E|X1|))−1"
PERKINS_TARGET = "σ|N(0,1)|"
TREND_HORIZONS = (10**3, 10**4, 10**5)


def _require_oscillating(law: IncrementLaw, positive_variance: bool = False):
    if law.dimension != 1:
        raise CapabilityError("level crossings are defined for one-dimensional walks")
    if not law.is_mean_zero:
        raise CapabilityError("crossing limit theorems need a mean-zero law")
    if not law.has_finite_variance:
        raise CapabilityError("crossing limit theorems need a finite variance")
    if positive_variance and law.moments().second_moment <= 0:
        raise CapabilityError("degenerate law: zero variance")


def clt_cdf(law: IncrementLaw):
    """y -> 2 Phi(sigma y / (2 E|X_1|)) - 1 for y >= 0, else 0."""
    m = law.moments()
    scale = m.sigma / (2.0 * m.abs_mean)
    return lambda y: np.where(np.asarray(y) >= 0, 2.0 * norm.cdf(scale * np.asarray(y, dtype=np.float64)) - 1.0, 0.0)


def half_normal_cdf(sigma: float):
    return lambda y: np.where(np.asarray(y) >= 0, 2.0 * norm.cdf(np.asarray(y, dtype=np.float64) / sigma) - 1.0, 0.0)


# ---------------------------------------------------------------------- #
# Law of large numbers
# ---------------------------------------------------------------------- #
def lln_overshoots(law: IncrementLaw, n_crossings: int = 10**5, seed: int = DEFAULT_SEED, start: float = 0.0,
                   replicas: int = REPLICAS, threads: int = MAX_THREADS, max_steps: int = MAX_STEPS) -> TestVerdict:
    """
    (1/n) sum_k |O_k| along crossing paths started at `start`.

    The n crossings are split over `replicas` independent paths from the same
    start, each with its own stream and a step budget of max_steps // replicas;
    the average is taken over all crossings in replica order. This is not a
    single-path average: the transient after `start` is counted once per
    replica. The limit is the same, and replicas=1 gives the single path.
    """
    _require_oscillating(law)
    if n_crossings < 1:
        raise ConfigurationError("n_crossings must be positive", field="n_crossings")
    target = abs_first_moment_pi(law)
    per_path_budget = max(1, max_steps // max(1, replicas))

    def task(rng: RngState, size: int) -> Dict:
        if size == 0:
            return {"values": np.empty(0), "exhausted": False}
        batch = crossings(walk_stream(law, start, rng), size, per_path_budget)
        return {"values": np.array([abs(e.overshoot) for e in batch]), "exhausted": batch.budget_exhausted}

    parts = map_replicas(task, seed, split_counts(n_crossings, replicas), threads, desc="LLN paths")
    summary = EmpiricalSummary.merge_all([EmpiricalSummary(p["values"]) for p in parts])
    estimate = summary.mean if summary.count else math.nan
    verdict = TestVerdict(
        name=f"lln_overshoots[start={start}]", statistic="relative_error",
        value=relative_error(estimate, target) if summary.count else math.inf,
        threshold=LLN_REL_TOL, sample_size=summary.count, seed=seed, streams=len(parts),
        partial=any(p["exhausted"] for p in parts), target="σ²/(2E|X1|)",
        details={"estimate": estimate, "limit": target, "start": start, "std_error": summary.std_error},
    )
    logger.info("LLN overshoots from %s: %.6g vs %.6g", start, estimate, target)
    return verdict


# ---------------------------------------------------------------------- #
# Central limit theorem for level crossings
# ---------------------------------------------------------------------- #
def _horizon_samples(law: IncrementLaw, n: int, M: int, seed: int, start: float, replicas: int,
                     threads: int, desc: str) -> List[Dict]:
    return map_replicas(
        lambda rng, size: horizon_crossings(law, size, n, rng, start=start),
        seed, split_counts(M, replicas), threads, desc=desc,
    )


def clt_levelcrossings(law: IncrementLaw, n: int = 10**5, M: int = 2 * 10**4, seed: int = DEFAULT_SEED,
                       start: float = 0.0, threshold: float = CLT_KS_THRESHOLD, replicas: int = REPLICAS,
                       threads: int = MAX_THREADS) -> TestVerdict:
    """KS distance between L_n/sqrt(n) over M walks and its limit law."""
    _require_oscillating(law, positive_variance=True)
    if n < 1 or M < 1:
        raise ConfigurationError("n and M must be positive", field="n" if n < 1 else "M")
    parts = _horizon_samples(law, n, M, seed, start, replicas, threads, f"CLT n={n}")
    summary = EmpiricalSummary.merge_all([EmpiricalSummary(p["count"] / math.sqrt(n)) for p in parts])
    cdf = clt_cdf(law)
    ks = ks_distance(summary, cdf)
    return TestVerdict(
        name=f"clt_levelcrossings[n={n}]", statistic="ks", value=ks, threshold=threshold,
        sample_size=summary.count, seed=seed, streams=len(parts), target=CLT_TARGET,
        details={"n": n, "start": start, "mean": summary.mean}, frame=ecdf_frame(summary, cdf),
    )


def clt_trend(law: IncrementLaw, horizons: Sequence[int] = TREND_HORIZONS, M: int = 2 * 10**4,
              seed: int = DEFAULT_SEED, replicas: int = REPLICAS, threads: int = MAX_THREADS) -> TestVerdict:
    """
    KS distances on a horizon ladder with the same seed; passes when no
    distance rises above its predecessor by more than the sampling noise
    level KS_CRITICAL/sqrt(M).
    """
    horizons = sorted(int(h) for h in horizons)
    if len(horizons) < 2:
        raise ConfigurationError("the trend check needs at least two horizons", field="horizons")
    distances = [clt_levelcrossings(law, n, M, seed, replicas=replicas, threads=threads).value for n in horizons]
    rise = max(0.0, max(b - a for a, b in zip(distances[:-1], distances[1:])))
    return TestVerdict(
        name="clt_trend", statistic="max_ks_increase", value=rise, threshold=KS_CRITICAL / math.sqrt(M),
        sample_size=M, seed=seed, streams=replicas, target=CLT_TARGET,
        details={"horizons": horizons, "ks": distances},
    )


# ---------------------------------------------------------------------- #
# Sum of overshoots
# ---------------------------------------------------------------------- #
def perkins_sum(law: IncrementLaw, n: int = 10**5, M: int = 2 * 10**4, seed: int = DEFAULT_SEED,
                threshold: float = PERKINS_KS_THRESHOLD, replicas: int = REPLICAS,
                threads: int = MAX_THREADS) -> TestVerdict:
    """KS distance between n^{-1/2} sum_{k<=L_n} |O_k| and the half-normal law of sigma |N|."""
    _require_oscillating(law, positive_variance=True)
    if n < 1 or M < 1:
        raise ConfigurationError("n and M must be positive", field="n" if n < 1 else "M")
    sigma = law.moments().sigma
    parts = _horizon_samples(law, n, M, seed, 0.0, replicas, threads, f"Overshoot sums n={n}")
    summary = EmpiricalSummary.merge_all(
        [EmpiricalSummary(p["abs_overshoot_sum"] / math.sqrt(n)) for p in parts]
    )
    cdf = half_normal_cdf(sigma)
    ks = ks_distance(summary, cdf)
    fitted = math.sqrt(summary.sum_sq / summary.count)
    return TestVerdict(
        name=f"perkins_sum[n={n}]", statistic="ks", value=ks, threshold=threshold,
        sample_size=summary.count, seed=seed, streams=len(parts), target=PERKINS_TARGET,
        details={"n": n, "sigma": sigma, "fitted_sigma": fitted}, frame=ecdf_frame(summary, cdf),
    )
