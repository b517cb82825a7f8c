"""Seedable, splittable PRNG streams.

Every consumer of randomness asks for a generator keyed by
``(master seed, purpose, *keys)``. Streams with different keys are
statistically independent, so per-user work can run in any order or in
parallel and still reproduce the same bits.
"""

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    GLOBAL = 0  # dataset-wide draws (prices, within-category correlations)
    DATA = 1  # per-user synthesis
    INIT = 2  # parameter initialization
    DROPOUT = 3
    BATCHING = 4  # batch shuffling
    FEEDING = 5  # teacher-forcing fallback draws
    SAMPLING = 6  # evaluation candidate sampling
    SCORING = 7  # random baseline scores


def make_rng(seed: int, stream: Stream, *keys: int) -> np.random.Generator:
    """Return a PCG64 generator for ``(seed, stream, *keys)``."""
    if seed < 0 or any(k < 0 for k in keys):
        raise ValueError(f"Seeds and stream keys must be non-negative: {seed}, {keys}")
    entropy = [int(seed), int(stream), *(int(k) for k in keys)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
