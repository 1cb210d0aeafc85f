"""Counter-based random streams.

Every random draw in the package comes from an :class:`RngStream`. A stream
is identified by a root seed and a tuple of integers; the same pair always
replays the same sequence, whichever thread consumes it.
"""

import enum
from typing import Tuple

import numpy as np


class RngStream:
    """Reproducible random stream backed by the Philox counter-based generator.

    Args:
        seed (int): Root 64-bit seed.
        stream_id (Tuple[int, ...], optional): Path of the stream below the root.
            Defaults to the root stream.

    Attributes:
        seed (int): Root seed.
        stream_id (Tuple[int, ...]): Stream path.
        generator (numpy.random.Generator): Generator all draws are taken from.
    """

    def __init__(self, seed: int, stream_id: Tuple[int, ...] = ()):
        if seed < 0:
            raise ValueError(f"Seed must be non-negative, got {seed}")
        self.seed = int(seed)
        self.stream_id = tuple(int(i) for i in stream_id)
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.stream_id)
        self.generator = np.random.Generator(np.random.Philox(sequence))

    def child(self, *ids: int) -> "RngStream":
        """Returns the independent stream found below this one at ``ids``."""
        return RngStream(self.seed, self.stream_id + tuple(ids))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


class StreamPurpose(enum.IntEnum):
    """Third component of a sweep's stream id: which update consumes it."""
    OMEGA = 0
    LAMBDA = 1
    Z = 2
    BETA = 3
    NU = 4
    INIT = 5
