"""
Report and CSV writers.

Reports are UTF-8 JSON objects with the stable keys
{experiment, seed, verdicts, runtime_ms}; floats are written with their
shortest round-trip representation. CSVs go through pandas with %.17g.
"""

import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from config import CSV_FLOAT_FORMAT

logger = logging.getLogger(__name__)

REPORT_KEYS = ("experiment", "seed", "verdicts", "runtime_ms")


def _plain(value):
    """JSON-safe copy: numpy scalars and arrays to Python, non-finite floats to strings."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    return value


def build_report(experiment: str, seed: int, verdicts: List[Dict], runtime_ms: float,
                 extra: Optional[Dict] = None) -> Dict:
    report = {"experiment": experiment, "seed": int(seed), "verdicts": verdicts, "runtime_ms": float(runtime_ms)}
    if extra:
        report.update({k: v for k, v in extra.items() if k not in REPORT_KEYS})
    return _plain(report)


def write_report(report: Dict, out_dir: Union[str, Path], name: str) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.json"
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_plain(report), f, indent=2, ensure_ascii=False)
    logger.info("report written to %s", path)
    return path


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, encoding="utf-8")
    logger.info("wrote %d rows to %s", len(frame), path)
    return path
