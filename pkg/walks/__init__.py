"""Random-walk trajectories, sets and event extraction."""

from .sets import SetKind, SetSpec
from .engine import (
    CrossingEvent,
    CycleCount,
    Direction,
    EntranceEvent,
    EventBatch,
    WalkStream,
    crossings,
    entrance_exit_events,
    level_crossing_count,
    occupation_until_T,
    upcrossings_of_level,
    walk_stream,
)
from .cycles import (
    CycleResult,
    entrance_into,
    horizon_crossings,
    occupation_of,
    run_cycles,
    upcrossings_of,
    zero_crossing,
)
from .dump import entrances_frame, events_frame, path_frame

__all__ = [
    "SetKind",
    "SetSpec",
    "CrossingEvent",
    "CycleCount",
    "Direction",
    "EntranceEvent",
    "EventBatch",
    "WalkStream",
    "crossings",
    "entrance_exit_events",
    "level_crossing_count",
    "occupation_until_T",
    "upcrossings_of_level",
    "walk_stream",
    "CycleResult",
    "entrance_into",
    "horizon_crossings",
    "occupation_of",
    "run_cycles",
    "upcrossings_of",
    "zero_crossing",
    "entrances_frame",
    "events_frame",
    "path_frame",
]
