"""
Declarative experiment configuration.

A configuration file is one JSON object validated by ExperimentConfig.
Unknown keys are rejected and every size must be a positive integer; a
validation failure is raised as a ConfigurationError naming the field.
"""

import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveFloat, PositiveInt, ValidationError

from config import DEFAULT_SEED, MAX_THREADS, OUTPUT_DIR, REPLICAS
from utils.errors import ConfigurationError


class ExperimentKind(str, Enum):
    INVARIANCE = "invariance"
    LLN = "lln"
    CLT = "clt"
    CLT_TREND = "clt_trend"
    PERKINS = "perkins"
    OCCUPATION = "occupation"
    UPCROSSING = "upcrossing"
    HOPF = "hopf"
    FIRST_MOMENT = "first_moment"
    FINITE_SUITE = "finite_suite"
    FINITE_CHAIN = "finite_chain"
    TORUS = "torus"
    KAC = "kac"
    DUALITY = "duality"
    BIJECTION = "bijection"
    PRODUCT_REDUCTION = "product_reduction"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class OutputConfig(_Strict):
    dir: str = OUTPUT_DIR
    csv: bool = True
    dump: bool = False


class TorusConfig(_Strict):
    d: int = Field(2, ge=1, le=2)
    m: int = Field(4, ge=3)
    pmf: List[Tuple[Union[int, List[int]], float]]
    A: Optional[List[int]] = None
    box_lower: Optional[List[int]] = None
    box_upper: Optional[List[int]] = None


class SuiteConfig(_Strict):
    count: PositiveInt = 50
    min_states: int = Field(3, ge=2)
    max_states: int = Field(30, ge=2)
    product_max: PositiveInt = 12


class GridConfig(_Strict):
    start: float
    stop: float
    num: PositiveInt = 201


class ExperimentConfig(_Strict):
    """One experiment run."""

    experiment: ExperimentKind
    name: Optional[str] = None
    seed: NonNegativeInt = DEFAULT_SEED
    replicas: PositiveInt = REPLICAS
    threads: PositiveInt = MAX_THREADS

    law: Optional[Dict[str, Any]] = None
    A: Optional[Dict[str, Any]] = None
    B: Optional[Dict[str, Any]] = None
    B1: Optional[Dict[str, Any]] = None
    B2: Optional[Dict[str, Any]] = None

    # invariance
    chain: Optional[str] = None
    steps: List[PositiveInt] = Field(default_factory=lambda: [1])
    N: Optional[PositiveInt] = None
    # crossings
    n: Optional[PositiveInt] = None
    M: Optional[PositiveInt] = None
    horizons: Optional[List[PositiveInt]] = None
    n_crossings: Optional[PositiveInt] = None
    starts: List[float] = Field(default_factory=lambda: [0.0])
    # occupation / up-crossings
    N_cycles: Optional[PositiveInt] = None
    variants: Optional[List[str]] = None
    levels: Optional[List[float]] = None
    start: Optional[str] = None
    # ratio
    n_events: Optional[PositiveInt] = None
    max_steps: Optional[PositiveInt] = None
    # finite chains
    chain_file: Optional[str] = None
    chain_data: Optional[Dict[str, Any]] = None
    suite: SuiteConfig = Field(default_factory=SuiteConfig)
    torus: Optional[TorusConfig] = None
    # density dumps
    density: Optional[Literal["pi_plus", "pi_minus", "pi", "entrance", "exit"]] = None
    grid: Optional[GridConfig] = None

    thresholds: Dict[str, PositiveFloat] = Field(default_factory=dict)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @property
    def label(self) -> str:
        return self.name or self.experiment.value


def _field_of(error: ValidationError) -> str:
    first = error.errors()[0]
    return ".".join(str(part) for part in first.get("loc", ())) or "config"


def parse_config(data: Dict, overrides: Optional[Dict] = None) -> ExperimentConfig:
    """Validate a configuration object, applying CLI overrides first."""
    if not isinstance(data, dict):
        raise ConfigurationError("configuration must be a JSON object", field="config")
    merged = {**data, **{k: v for k, v in (overrides or {}).items() if v is not None}}
    try:
        return ExperimentConfig.model_validate(merged)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigurationError(first.get("msg", "invalid value"), field=_field_of(e)) from e


def load_config(path: Union[str, Path], overrides: Optional[Dict] = None) -> ExperimentConfig:
    """Read and validate a JSON configuration file."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigurationError(f"cannot read {path}: {e.strerror}", field="config") from e
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"{path} is not valid JSON: {e.msg} (line {e.lineno})", field="config") from e
    return parse_config(data, overrides)
