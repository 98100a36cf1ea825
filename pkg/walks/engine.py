"""
Streaming random-walk trajectories and event extraction.

Trajectories are produced chunk by chunk and never stored. Every extractor
accepts either a WalkStream (fast path over its chunks) or any iterable of
positions (e.g. a hand-written path), and takes an explicit step budget:
when the budget or the input runs out first, the partial result is returned
flagged ``budget_exhausted`` instead of looping forever.

Zero belongs to the nonnegative side everywhere: an up-crossing at k means
S_{k-1} < 0 <= S_k and a down-crossing means S_{k-1} >= 0 > S_k.
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, List, Optional, Tuple, Union

import numpy as np

from config import CHUNK_SIZE, MAX_STEPS
from increments.laws import IncrementLaw
from increments.rng import RngState
from walks.sets import SetSpec
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

Point = Union[float, Tuple[float, ...]]


class Direction(str, Enum):
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class CrossingEvent:
    """The n-th crossing of level zero: U_n = S_{T_n - 1}, O_n = S_{T_n}."""

    index: int
    time: int
    undershoot: float
    overshoot: float
    direction: Direction


@dataclass(frozen=True)
class EntranceEvent:
    """Entry into A at time T: exit point S_{T-1} in A^c, entrance point S_T in A."""

    index: int
    time: int
    exit_point: Point
    entrance_point: Point


@dataclass
class EventBatch:
    """Events extracted from one trajectory."""

    events: List = field(default_factory=list)
    budget_exhausted: bool = False
    steps: int = 0

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __getitem__(self, item):
        return self.events[item]


@dataclass(frozen=True)
class CycleCount:
    """A count accumulated over one cycle k = 0..T-1, T the first zero up-crossing."""

    value: int
    time: Optional[int]
    budget_exhausted: bool = False


class WalkStream:
    """
    Lazily produced positions S_0, S_1, ... of a random walk.

    Lattice walks accumulate exact integer multiples of h; positions are
    reported as points h*k.
    """

    def __init__(self, law: IncrementLaw, start, rng: RngState, chunk_size: int = CHUNK_SIZE):
        self.law = law
        self.rng = rng
        self.chunk_size = int(chunk_size)
        start = np.asarray(start, dtype=np.float64)
        if law.dimension == 1 and start.ndim != 0:
            raise ConfigurationError("start must be a scalar for a one-dimensional walk", field="start")
        if law.dimension > 1 and start.shape != (law.dimension,):
            raise ConfigurationError(f"start must have {law.dimension} coordinates", field="start")
        self._start_units = law.to_units(start)
        self.start = law.to_points(self._start_units)

    def chunks(self) -> Iterator[np.ndarray]:
        """Positions as consecutive arrays of points; the first array is [S_0]."""
        law = self.law
        current = np.array(self._start_units, copy=True)
        yield np.asarray(law.to_points(current[None, ...]), dtype=np.float64)
        while True:
            steps = law.sample_units(self.rng, self.chunk_size)
            units = current + np.cumsum(steps, axis=0)
            current = units[-1]
            yield np.asarray(law.to_points(units), dtype=np.float64)

    def __iter__(self) -> Iterator[Point]:
        for chunk in self.chunks():
            for value in chunk:
                yield _as_point(value)

    def take(self, n: int) -> np.ndarray:
        """Materialize S_0..S_{n-1}."""
        parts, have = [], 0
        for chunk in self.chunks():
            parts.append(chunk[: n - have])
            have += len(parts[-1])
            if have >= n:
                break
        return np.concatenate(parts)


def walk_stream(law: IncrementLaw, start, rng: RngState, chunk_size: int = CHUNK_SIZE) -> WalkStream:
    """Positions S_0 = start, S_n = S_0 + X_1 + ... + X_n, produced lazily."""
    return WalkStream(law, start, rng, chunk_size)


def _as_point(value) -> Point:
    if np.ndim(value) == 0:
        return float(value)
    return tuple(float(v) for v in value)


def _chunks_of(positions, chunk_size: int = CHUNK_SIZE) -> Iterator[np.ndarray]:
    if isinstance(positions, WalkStream):
        yield from positions.chunks()
        return
    if isinstance(positions, np.ndarray):
        for i in range(0, len(positions), chunk_size):
            yield np.asarray(positions[i:i + chunk_size], dtype=np.float64)
        return
    iterator = iter(positions)
    while True:
        batch = list(itertools.islice(iterator, chunk_size))
        if not batch:
            return
        yield np.asarray(batch, dtype=np.float64)


def _windows(positions, max_steps: int):
    """
    Yield (full, offset) pairs where full[i] = S_{offset + i} and consecutive
    windows overlap in one position, so every step (S_{k-1}, S_k) with
    k <= max_steps appears exactly once. The final value tells whether the
    input ended (True) or the budget stopped it (False).
    """
    prev = None
    offset = 0
    for chunk in _chunks_of(positions):
        if prev is None:
            full = chunk
        else:
            full = np.concatenate((prev[None, ...], chunk))
        # positions beyond S_{max_steps} are never needed
        limit = max_steps - offset + 1
        if len(full) > limit:
            yield full[:limit], offset
            return False
        yield full, offset
        offset += len(full) - 1
        prev = full[-1]
        if offset >= max_steps:
            return False
    return True


def _iterate_windows(positions, max_steps: int):
    gen = _windows(positions, max_steps)
    while True:
        try:
            yield next(gen)
        except StopIteration:
            return


def crossings(positions, max_events: int, max_steps: int = MAX_STEPS) -> EventBatch:
    """
    First max_events crossings of level zero.

    Args:
        positions: WalkStream or iterable of S_0, S_1, ...
        max_events: Number of crossings to extract
        max_steps: Step budget; crossings after S_{max_steps} are not seen

    Returns:
        EventBatch of CrossingEvent, flagged budget_exhausted when fewer than
        max_events crossings were found
    """
    batch = EventBatch()
    for full, offset in _iterate_windows(positions, max_steps):
        if len(full) < 2:
            continue
        nonneg = full >= 0
        idx = np.flatnonzero(nonneg[1:] != nonneg[:-1])
        need = max_events - len(batch.events)
        for i in idx[:need]:
            batch.events.append(CrossingEvent(
                index=len(batch.events) + 1,
                time=int(offset + i + 1),
                undershoot=float(full[i]),
                overshoot=float(full[i + 1]),
                direction=Direction.UP if nonneg[i + 1] else Direction.DOWN,
            ))
        batch.steps = int(offset + len(full) - 1)
        if len(batch.events) >= max_events:
            batch.steps = batch.events[-1].time
            return batch
    batch.budget_exhausted = True
    logger.warning("crossing extraction stopped after %d steps with %d/%d events",
                   batch.steps, len(batch.events), max_events)
    return batch


def entrance_exit_events(positions, A: SetSpec, max_events: int, max_steps: int = MAX_STEPS) -> EventBatch:
    """
    Entries into A from A^c: pairs (S_{T-1}, S_T) with S_{T-1} in A^c and S_T in A.

    Returns:
        EventBatch of EntranceEvent, flagged budget_exhausted when short
    """
    batch = EventBatch()
    for full, offset in _iterate_windows(positions, max_steps):
        if len(full) < 2:
            continue
        inside = A.contains(full)
        idx = np.flatnonzero(~inside[:-1] & inside[1:])
        need = max_events - len(batch.events)
        for i in idx[:need]:
            batch.events.append(EntranceEvent(
                index=len(batch.events) + 1,
                time=int(offset + i + 1),
                exit_point=_as_point(full[i]),
                entrance_point=_as_point(full[i + 1]),
            ))
        batch.steps = int(offset + len(full) - 1)
        if len(batch.events) >= max_events:
            batch.steps = batch.events[-1].time
            return batch
    batch.budget_exhausted = True
    logger.warning("entrance extraction stopped after %d steps with %d/%d events",
                   batch.steps, len(batch.events), max_events)
    return batch


def _one_dimensional(full: np.ndarray, what: str) -> np.ndarray:
    if full.ndim != 1:
        raise ConfigurationError(f"{what} are defined for one-dimensional walks", field="positions")
    return full


def level_crossing_count(positions, n: int) -> int:
    """L_n: number of zero-level crossings at times k <= n."""
    if n < 1:
        raise ConfigurationError("horizon n must be at least 1", field="n")
    count = 0
    for full, _ in _iterate_windows(positions, n):
        _one_dimensional(full, "level crossings")
        if len(full) < 2:
            continue
        nonneg = full >= 0
        count += int(np.count_nonzero(nonneg[1:] != nonneg[:-1]))
    return count


def _until_first_upcrossing(positions, max_steps: int, window_stat) -> CycleCount:
    """Accumulate window_stat(prev, cur) over steps i = 0..T-1 (pairs (S_i, S_{i+1}))."""
    total = 0
    for full, offset in _iterate_windows(positions, max_steps):
        _one_dimensional(full, "up-crossing counts")
        if len(full) < 2:
            continue
        prev, cur = full[:-1], full[1:]
        up = np.flatnonzero((prev < 0) & (cur >= 0))
        if up.size:
            stop = int(up[0]) + 1
            total += int(window_stat(prev[:stop], cur[:stop]))
            return CycleCount(value=total, time=int(offset + stop))
        total += int(window_stat(prev, cur))
    return CycleCount(value=total, time=None, budget_exhausted=True)


def upcrossings_of_level(positions, a: float, max_steps: int = MAX_STEPS) -> CycleCount:
    """
    L_T^up(a): number of i in [0, T-1] with S_i < a <= S_{i+1}, where T is
    the first up-crossing time of level zero.
    """
    return _until_first_upcrossing(
        positions, max_steps, lambda prev, cur: np.count_nonzero((prev < a) & (cur >= a))
    )


def occupation_until_T(positions, B: SetSpec, max_steps: int = MAX_STEPS) -> CycleCount:
    """Number of k in [0, T-1] with S_k in B, T the first zero up-crossing time."""
    if B.dimension != 1:
        raise ConfigurationError("occupation counts are defined for one-dimensional walks", field="B")
    return _until_first_upcrossing(
        positions, max_steps, lambda prev, cur: np.count_nonzero(B.contains(prev))
    )


# Example usage
if __name__ == "__main__":
    print(crossings([0, 1, -1, 2], max_events=5).events)
    print(level_crossing_count([0, 1, -1, 2], 3))
    print(upcrossings_of_level([0, -1, 3], 2.0))
