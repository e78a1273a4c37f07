"""Seeded counter-based random streams, forked by label.

Each subsystem draws from its own Philox stream derived from the run seed
and a label, so enlarging one ensemble never shifts the numbers another
subsystem sees.
"""

import zlib

import numpy as np


def stream(seed: int, label: str) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(zlib.crc32(label.encode("utf-8")),))
    return np.random.Generator(np.random.Philox(ss))


class RunRNG:
    """Factory of labelled streams for one run."""

    def __init__(self, seed: int):
        if int(seed) < 0:
            raise ValueError("seed must be non-negative")
        self.seed = int(seed)

    def fork(self, label: str) -> np.random.Generator:
        return stream(self.seed, label)
