"""Deterministic random streams.

Every random draw in the package flows from an RngStream, which is a
(seed, stream-path) pair mapped onto numpy's PCG64 through SeedSequence.
Identical (seed, stream, call sequence) reproduces identical draws on any
platform; distinct stream paths give statistically independent streams.

Checker streams are derived from the root seed by a stable 32-bit key of the
checker id, and replica streams by appending the replica index, so results
never depend on scheduling or batching.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

__all__ = ["RngStream", "stream_key"]


def stream_key(name: str) -> int:
    """Stable 32-bit stream id for a named consumer (e.g. a checker id)."""
    return zlib.crc32(name.encode("utf-8"))


@dataclass(frozen=True)
class RngStream:
    """Root seed plus a hierarchical stream path.

    ``child(k)`` derives an independent substream; ``generator()`` builds a
    fresh numpy Generator positioned at the start of the stream.
    """

    seed: int
    stream: tuple[int, ...] = ()

    def __post_init__(self):
        if isinstance(self.stream, int):
            object.__setattr__(self, "stream", (self.stream,))

    def child(self, k: int) -> "RngStream":
        return RngStream(self.seed, self.stream + (int(k),))

    def named_child(self, name: str) -> "RngStream":
        return self.child(stream_key(name))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.PCG64(ss))
