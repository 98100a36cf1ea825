"""
Counter-based random streams.

A stream is a Philox generator keyed by the pair (seed, stream_id). Two
streams with the same key produce bit-identical draws, so parallel replicas
are reproducible without any coordination between workers.
"""

from dataclasses import dataclass, field

import numpy as np

from utils.errors import ConfigurationError

_U64 = (1 << 64) - 1


@dataclass
class RngState:
    """Single-owner random stream keyed by (seed, stream_id)."""

    seed: int
    stream_id: int = 0
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 <= self.seed <= _U64:
            raise ConfigurationError("seed must be an unsigned 64-bit integer", field="seed")
        if not 0 <= self.stream_id <= _U64:
            raise ConfigurationError("stream id must be an unsigned 64-bit integer", field="stream_id")
        key = self.seed | (self.stream_id << 64)
        self.generator = np.random.Generator(np.random.Philox(key=key))

    def derive(self, stream_id: int) -> "RngState":
        """Fresh stream with the same seed and another stream id."""
        return RngState(self.seed, stream_id)

    def uniform(self, size) -> np.ndarray:
        return self.generator.random(size)

    @property
    def manifest(self) -> dict:
        return {"seed": self.seed, "stream_id": self.stream_id}


def replica_streams(seed: int, replicas: int, offset: int = 0):
    """Streams for replicas 0..replicas-1 (stream ids offset..offset+replicas-1)."""
    return [RngState(seed, offset + i) for i in range(replicas)]
