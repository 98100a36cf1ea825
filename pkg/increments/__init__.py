"""Increment distributions and counter-based random streams."""

from .rng import RngState, replica_streams
from .laws import (
    Family,
    IncrementLaw,
    LatticeLaw,
    LaplaceLaw,
    GaussianLaw,
    UniformLaw,
    UpwardExponentialLaw,
    ProductLaw,
    Moments,
    law_from_spec,
    simple_walk,
)

__all__ = [
    "RngState",
    "replica_streams",
    "Family",
    "IncrementLaw",
    "LatticeLaw",
    "LaplaceLaw",
    "GaussianLaw",
    "UniformLaw",
    "UpwardExponentialLaw",
    "ProductLaw",
    "Moments",
    "law_from_spec",
    "simple_walk",
]
