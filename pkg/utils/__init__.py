"""Errors, parsing helpers, experiment configuration and report writers."""

from .errors import (
    CapabilityError,
    ConfigurationError,
    ConsistencyError,
    DomainError,
    OvershootLabError,
    StructuralError,
)
from .experiment_config import ExperimentConfig, ExperimentKind, load_config, parse_config
from .reports import REPORT_KEYS, build_report, write_csv, write_report

__all__ = [
    "CapabilityError",
    "ConfigurationError",
    "ConsistencyError",
    "DomainError",
    "OvershootLabError",
    "StructuralError",
    "ExperimentConfig",
    "ExperimentKind",
    "load_config",
    "parse_config",
    "REPORT_KEYS",
    "build_report",
    "write_csv",
    "write_report",
]
