"""
Vectorized cycle engine.

Many independent one-dimensional walks are advanced together in blocks of
shape (alive walkers, L steps) until each hits its stopping rule: the first
entrance into a set, or the first crossing of level zero. Observers count
along the way over the positions S_0..S_{T-1} (and steps (S_i, S_{i+1}) with
i < T). Walkers still running after max_steps are reported as truncated.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np

from config import BLOCK_ELEMENTS, CYCLE_MAX_STEPS
from increments.laws import IncrementLaw
from increments.rng import RngState
from walks.sets import SetSpec
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

_MIN_BLOCK = 8
_MAX_BLOCK = 1 << 16

# stop(prev, cur) -> bool array, True where the step prev -> cur ends the cycle
StopRule = Callable[[np.ndarray, np.ndarray], np.ndarray]
# observer(prev, cur, valid) -> per-walker totals over valid steps
Observer = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def entrance_into(A: SetSpec) -> StopRule:
    """Stop at the first step from A^c into A."""
    def rule(prev, cur):
        return ~A.contains(prev) & A.contains(cur)
    return rule


def zero_crossing() -> StopRule:
    """Stop at the first crossing of level zero in either direction."""
    def rule(prev, cur):
        return (prev >= 0) != (cur >= 0)
    return rule


def occupation_of(B: SetSpec) -> Observer:
    """Counts k < T with S_k in B."""
    def observe(prev, cur, valid):
        return np.count_nonzero(B.contains(prev) & valid, axis=1)
    return observe


def upcrossings_of(a: float) -> Observer:
    """Counts i < T with S_i < a <= S_{i+1}."""
    def observe(prev, cur, valid):
        return np.count_nonzero((prev < a) & (cur >= a) & valid, axis=1)
    return observe


@dataclass
class CycleResult:
    """Outcome of one batch of cycles; arrays are indexed by walker."""

    final: np.ndarray
    before: np.ndarray
    times: np.ndarray
    truncated: np.ndarray
    totals: Dict[str, np.ndarray]

    @property
    def n_truncated(self) -> int:
        return int(np.count_nonzero(self.truncated))


def run_cycles(
    law: IncrementLaw,
    starts,
    rng: RngState,
    stop: StopRule,
    observers: Optional[Dict[str, Observer]] = None,
    max_steps: int = CYCLE_MAX_STEPS,
    block_elements: int = BLOCK_ELEMENTS,
) -> CycleResult:
    """
    Run one cycle per starting point.

    Args:
        law: One-dimensional increment law
        starts: Starting points, one per walker
        rng: Random stream owned by this call
        stop: Stopping rule evaluated on each step
        observers: Named per-step counters
        max_steps: Cycles longer than this are truncated
        block_elements: Memory budget (walkers x steps) per block

    Returns:
        CycleResult with final points S_T, the points S_{T-1} before them,
        times T and observer totals
    """
    if law.dimension != 1:
        raise ConfigurationError("the cycle engine runs one-dimensional walks", field="law")
    observers = observers or {}
    start_units = law.to_units(np.atleast_1d(np.asarray(starts, dtype=np.float64)))
    n = len(start_units)

    position = start_units.copy()
    before = start_units.copy()
    times = np.zeros(n, dtype=np.int64)
    truncated = np.zeros(n, dtype=bool)
    totals = {name: np.zeros(n, dtype=np.int64) for name in observers}
    alive = np.arange(n)
    elapsed = 0

    while alive.size:
        if elapsed >= max_steps:
            truncated[alive] = True
            times[alive] = elapsed
            break
        L = int(np.clip(block_elements // alive.size, _MIN_BLOCK, _MAX_BLOCK))
        L = min(L, max_steps - elapsed)

        steps = law.sample_units(rng, alive.size * L).reshape(alive.size, L)
        cur_u = position[alive][:, None] + np.cumsum(steps, axis=1)
        prev_u = np.concatenate((position[alive][:, None], cur_u[:, :-1]), axis=1)
        prev, cur = law.to_points(prev_u), law.to_points(cur_u)

        hit = stop(prev, cur)
        done = hit.any(axis=1)
        first = np.argmax(hit, axis=1)
        last = np.where(done, first, L - 1)
        valid = np.arange(L)[None, :] <= last[:, None]
        for name, observe in observers.items():
            totals[name][alive] += observe(prev, cur, valid)

        rows = np.arange(alive.size)
        position[alive] = cur_u[rows, last]
        before[alive] = prev_u[rows, last]
        finished = alive[done]
        times[finished] = elapsed + first[done] + 1
        alive = alive[~done]
        elapsed += L

    if truncated.any():
        logger.warning("%d of %d cycles truncated at %d steps", int(truncated.sum()), n, max_steps)
    return CycleResult(
        final=np.asarray(law.to_points(position), dtype=np.float64),
        before=np.asarray(law.to_points(before), dtype=np.float64),
        times=times,
        truncated=truncated,
        totals=totals,
    )


def horizon_crossings(law: IncrementLaw, walkers: int, horizon: int, rng: RngState, start: float = 0.0,
                      block_elements: int = BLOCK_ELEMENTS) -> Dict[str, np.ndarray]:
    """
    Crossing statistics of independent walks from S_0 = start up to time horizon.

    Returns:
        {"count": L_n per walker, "abs_overshoot_sum": sum of |O_k| over the
        crossings at times k <= n}
    """
    if law.dimension != 1:
        raise ConfigurationError("horizon statistics need a one-dimensional walk", field="law")
    position = np.full(walkers, law.to_units(np.float64(start)))
    count = np.zeros(walkers, dtype=np.int64)
    overshoot = np.zeros(walkers, dtype=np.float64)
    elapsed = 0
    L = int(np.clip(block_elements // max(walkers, 1), _MIN_BLOCK, _MAX_BLOCK))
    while elapsed < horizon:
        step_count = min(L, horizon - elapsed)
        steps = law.sample_units(rng, walkers * step_count).reshape(walkers, step_count)
        cur_u = position[:, None] + np.cumsum(steps, axis=1)
        prev_u = np.concatenate((position[:, None], cur_u[:, :-1]), axis=1)
        cur = law.to_points(cur_u)
        crossed = (law.to_points(prev_u) >= 0) != (cur >= 0)
        count += np.count_nonzero(crossed, axis=1)
        overshoot += np.where(crossed, np.abs(cur), 0.0).sum(axis=1)
        position = cur_u[:, -1]
        elapsed += step_count
    return {"count": count, "abs_overshoot_sum": overshoot}
