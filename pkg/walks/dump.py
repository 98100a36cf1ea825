"""Tabular dumps of trajectories and events, capped at DUMP_LIMIT rows."""

import numpy as np
import pandas as pd

from config import DUMP_LIMIT
from walks.engine import EventBatch


def path_frame(positions: np.ndarray) -> pd.DataFrame:
    """Positions as columns k, S_k (one coordinate column per dimension)."""
    positions = np.asarray(positions, dtype=np.float64)[:DUMP_LIMIT]
    if positions.ndim == 1:
        return pd.DataFrame({"k": np.arange(len(positions)), "S_k": positions})
    frame = pd.DataFrame(positions, columns=[f"S_k[{j}]" for j in range(positions.shape[1])])
    frame.insert(0, "k", np.arange(len(positions)))
    return frame


def events_frame(batch: EventBatch) -> pd.DataFrame:
    """Crossing events as columns n, T_n, U_n, O_n, dir."""
    rows = [
        {"n": e.index, "T_n": e.time, "U_n": e.undershoot, "O_n": e.overshoot, "dir": e.direction.value}
        for e in batch.events[:DUMP_LIMIT]
    ]
    return pd.DataFrame(rows, columns=["n", "T_n", "U_n", "O_n", "dir"])


def entrances_frame(batch: EventBatch) -> pd.DataFrame:
    """Entrance events as columns n, T_n, exit, entrance (points as strings in d >= 2)."""
    rows = []
    for e in batch.events[:DUMP_LIMIT]:
        exit_point, entrance_point = e.exit_point, e.entrance_point
        if isinstance(exit_point, tuple):
            exit_point, entrance_point = " ".join(map(repr, exit_point)), " ".join(map(repr, entrance_point))
        rows.append({"n": e.index, "T_n": e.time, "exit": exit_point, "entrance": entrance_point})
    return pd.DataFrame(rows, columns=["n", "T_n", "exit", "entrance"])
