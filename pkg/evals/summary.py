"""
Empirical summaries, verdicts and the replica fan-out shared by every
statistical experiment.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from config import MAX_THREADS, MULTINOMIAL_SIGMAS
from increments.rng import RngState
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

KS_MIN_COUNT = 100


# ---------------------------------------------------------------------- #
# Empirical summaries
# ---------------------------------------------------------------------- #
@dataclass
class EmpiricalSummary:
    """
    Sample buffer with exact sums.

    Sums are taken with math.fsum over the whole buffer, so a merged summary
    reports the same count, mean and variance whatever the merge order.
    """

    values: np.ndarray = field(default_factory=lambda: np.empty(0))
    bins: Optional[np.ndarray] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).ravel()
        self._sorted: Optional[np.ndarray] = None

    @classmethod
    def of(cls, values: Iterable[float], bins: Optional[Sequence[float]] = None) -> "EmpiricalSummary":
        return cls(np.fromiter(values, dtype=np.float64) if not isinstance(values, np.ndarray) else values,
                   None if bins is None else np.asarray(bins, dtype=np.float64))

    @property
    def count(self) -> int:
        return int(self.values.size)

    @property
    def sum(self) -> float:
        return math.fsum(self.values)

    @property
    def sum_sq(self) -> float:
        return math.fsum(self.values * self.values)

    @property
    def mean(self) -> float:
        if not self.count:
            return math.nan
        return self.sum / self.count

    @property
    def variance(self) -> float:
        if self.count < 2:
            return math.nan
        m = self.mean
        return math.fsum((self.values - m) ** 2) / (self.count - 1)

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count > 1 else math.nan

    @property
    def sorted(self) -> np.ndarray:
        if self._sorted is None:
            self._sorted = np.sort(self.values, kind="stable")
        return self._sorted

    def histogram(self) -> Optional[np.ndarray]:
        if self.bins is None:
            return None
        counts, _ = np.histogram(self.values, bins=self.bins)
        return counts

    def merge(self, other: "EmpiricalSummary") -> "EmpiricalSummary":
        if self.bins is not None and other.bins is not None and not np.array_equal(self.bins, other.bins):
            raise ConfigurationError("cannot merge summaries with different bins", field="bins")
        bins = self.bins if self.bins is not None else other.bins
        return EmpiricalSummary(np.concatenate((self.values, other.values)), bins)

    @staticmethod
    def merge_all(parts: Sequence["EmpiricalSummary"]) -> "EmpiricalSummary":
        if not parts:
            return EmpiricalSummary()
        bins = next((p.bins for p in parts if p.bins is not None), None)
        return EmpiricalSummary(np.concatenate([p.values for p in parts]), bins)

    def describe(self) -> Dict:
        return {"count": self.count, "mean": self.mean, "variance": self.variance}


def ks_distance(empirical: EmpiricalSummary, cdf: Callable, left_cdf: Optional[Callable] = None) -> float:
    """
    sup_x |F_n(x) - F(x)|, exact for any target.

    The supremum is attained at sample points, approached either from the
    right (F_n(x), F(x)) or from the left (F_n(x-), F(x-)). Pass left_cdf for
    targets with atoms; continuous targets use cdf for both sides.

    Samples below KS_MIN_COUNT are not an error: the distance is still exact
    (a single draw at the median gives 0.5), but the KS_CRITICAL/sqrt(n)
    thresholds are meaningless there, so a warning is logged.

    Raises:
        ConfigurationError: if the summary is empty
    """
    if empirical.count == 0:
        raise ConfigurationError("KS distance of an empty sample", field="count")
    if empirical.count < KS_MIN_COUNT:
        logger.warning("KS distance on %d samples (< %d)", empirical.count, KS_MIN_COUNT)
    xs, counts = np.unique(empirical.sorted, return_counts=True)
    n = empirical.count
    right = np.cumsum(counts) / n
    left = right - counts / n
    F = np.asarray(cdf(xs), dtype=np.float64)
    F_left = F if left_cdf is None else np.asarray(left_cdf(xs), dtype=np.float64)
    return float(max(np.max(np.abs(right - F)), np.max(np.abs(left - F_left))))


def ecdf_frame(empirical: EmpiricalSummary, cdf: Callable, grid: Optional[Sequence[float]] = None,
               points: int = 200) -> pd.DataFrame:
    """(y, empirical_cdf, target_cdf) on a grid spanning the sample."""
    if grid is None:
        lo, hi = empirical.sorted[0], empirical.sorted[-1]
        grid = np.linspace(lo, hi, points) if hi > lo else np.array([lo])
    grid = np.asarray(grid, dtype=np.float64)
    emp = np.searchsorted(empirical.sorted, grid, side="right") / empirical.count
    return pd.DataFrame({"y": grid, "empirical_cdf": emp, "target_cdf": np.asarray(cdf(grid), dtype=np.float64)})


# ---------------------------------------------------------------------- #
# Verdicts
# ---------------------------------------------------------------------- #
@dataclass
class TestVerdict:
    """One statistical check: passed iff value <= threshold."""

    __test__ = False

    name: str
    statistic: str
    value: float
    threshold: float
    sample_size: int
    seed: int
    streams: int = 1
    partial: bool = False
    asserted: bool = True
    target: Optional[str] = None
    details: Dict = field(default_factory=dict)
    frame: Optional[pd.DataFrame] = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        if not self.asserted:
            return True
        return bool(self.value <= self.threshold)

    @property
    def manifest(self) -> Dict:
        return {"seed": self.seed, "streams": self.streams}

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "value": float(self.value),
            "threshold": float(self.threshold),
            "passed": self.passed,
            "asserted": self.asserted,
            "partial": self.partial,
            "sample_size": int(self.sample_size),
            "seed_manifest": self.manifest,
            "target": self.target,
            "details": self.details,
        }


def relative_error(estimate: float, target: float) -> float:
    if target == 0:
        return abs(estimate)
    return abs(estimate - target) / abs(target)


def multinomial_deviation(sample: np.ndarray, points: np.ndarray, probs: np.ndarray) -> Dict:
    """
    Largest standardized deviation of the empirical weights from probs.

    Atoms with probability 0 or 1 must match exactly (z = inf otherwise);
    samples outside the support also give z = inf.
    """
    n = sample.size
    points = np.asarray(points, dtype=np.float64)
    probs = np.asarray(probs, dtype=np.float64)
    idx = np.searchsorted(points, sample)
    idx = np.minimum(idx, len(points) - 1)
    outside = int(np.count_nonzero(~np.isclose(points[idx], sample)))
    counts = np.bincount(idx[np.isclose(points[idx], sample)], minlength=len(points))
    freq = counts / n
    sd = np.sqrt(probs * (1.0 - probs) / n)
    gap = np.abs(freq - probs)
    z = np.where(sd > 0, gap / np.where(sd > 0, sd, 1.0), np.where(gap > 0, np.inf, 0.0))
    worst = float(np.max(z)) if outside == 0 else math.inf
    return {"max_z": worst, "outside_support": outside,
            "weights": {float(p): float(f) for p, f in zip(points, freq)}}


def multinomial_verdict(name: str, sample: np.ndarray, points, probs, seed: int, streams: int,
                        sigmas: float = MULTINOMIAL_SIGMAS, target: Optional[str] = None) -> TestVerdict:
    dev = multinomial_deviation(np.asarray(sample, dtype=np.float64), np.asarray(points), np.asarray(probs))
    return TestVerdict(name=name, statistic="multinomial_max_z", value=dev["max_z"], threshold=sigmas,
                       sample_size=int(np.size(sample)), seed=seed, streams=streams, target=target,
                       details={"empirical_weights": dev["weights"],
                                "target_weights": {float(p): float(q) for p, q in zip(points, probs)},
                                "outside_support": dev["outside_support"]})


# ---------------------------------------------------------------------- #
# Replicas
# ---------------------------------------------------------------------- #
def split_counts(total: int, replicas: int) -> List[int]:
    """total split into `replicas` near-equal nonnegative parts, larger parts first."""
    if total < 0 or replicas < 1:
        raise ConfigurationError("sample size and replica count must be positive", field="replicas")
    base, extra = divmod(total, replicas)
    return [base + (1 if i < extra else 0) for i in range(replicas)]


def map_replicas(task: Callable[[RngState, int], object], seed: int, sizes: Sequence[int],
                 threads: int = MAX_THREADS, desc: str = "Replicas", offset: int = 0,
                 show_progress: bool = True) -> List:
    """
    Run task(rng_i, size_i) for every replica and return results in replica order.

    Replica i owns stream (seed, offset + i); the results do not depend on
    the thread count.
    """
    results: List = [None] * len(sizes)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        futures = {executor.submit(task, RngState(seed, offset + i), size): i
                   for i, size in enumerate(sizes)}
        with tqdm(total=len(sizes), desc=desc, disable=not show_progress, leave=False) as pbar:
            for future in as_completed(futures):
                results[futures[future]] = future.result()
                pbar.update(1)
    return results
