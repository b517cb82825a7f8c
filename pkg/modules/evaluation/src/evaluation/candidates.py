"""Sampled candidate sets for ranking."""

from __future__ import annotations

from collections.abc import Collection

import numpy as np
from numerics import Stream, make_rng

from .data_models import CandidateSet


def sample_candidates(
    n_items: int,
    remaining: Collection[int],
    rng: np.random.Generator,
    num_candidates: int = 100,
) -> CandidateSet:
    """Uniform draw without replacement from the items outside ``remaining``, plus ``remaining``.

    The draw walks one random permutation of all items and keeps the first
    ``num_candidates`` that are not remaining, so two callers with the same rng
    state and the same remaining set get the same candidates.
    """
    rest = np.fromiter(remaining, dtype=np.int64, count=len(remaining))
    order = rng.permutation(n_items)
    free = order[~np.isin(order, rest)]
    sampled = free[:num_candidates]
    return CandidateSet(items=np.sort(np.concatenate([sampled, rest])), n_sampled=len(sampled))


class CandidateSampler:
    """Candidate sets keyed by (seed, user, session time, step).

    Every scorer evaluated under the same seed sees identical candidates
    whenever it reaches the same remaining set.
    """

    def __init__(self, n_items: int, num_candidates: int = 100, seed: int = 0):
        self.n_items = n_items
        self.num_candidates = num_candidates
        self.seed = seed

    def sample(self, user: int, t: int, step: int, remaining: Collection[int]) -> CandidateSet:
        rng = make_rng(self.seed, Stream.SAMPLING, user, t, step)
        return sample_candidates(self.n_items, remaining, rng, self.num_candidates)
