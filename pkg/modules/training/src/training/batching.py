"""Training examples and similar-size mini-batches."""

from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Sequence

import numpy as np
from evaluation import SplitSpec

from .data_models import Batch, BatchPlan, TrainingSession

logger = logging.getLogger(__name__)


def training_sessions(splits: SplitSpec) -> list[TrainingSession]:
    """Every training basket with the items of that user's earlier training baskets."""
    out = []
    for user in sorted(splits.users):
        history: list[int] = []
        for s in splits.users[user].train:
            out.append(TrainingSession(user, s.t, tuple(history), s.items))
            history.extend(s.items)
    return out


def plan_batches(
    sessions: Sequence[TrainingSession], batch_size: int, rng: np.random.Generator
) -> BatchPlan:
    """Group baskets by size, shuffle within sizes and chunk.

    Full chunks hold one basket size. The leftover partial chunks of all sizes
    are pooled, sorted by size and chunked, so only those batches mix sizes
    (padded with EOB). Batch order is shuffled too.
    """
    by_size: dict[int, list[int]] = defaultdict(list)
    for i, s in enumerate(sessions):
        by_size[len(s.items)].append(i)

    batches: list[list[int]] = []
    leftovers: list[int] = []
    for size in sorted(by_size):
        idx = np.asarray(by_size[size])[rng.permutation(len(by_size[size]))].tolist()
        n_full = len(idx) // batch_size * batch_size
        batches.extend(idx[i : i + batch_size] for i in range(0, n_full, batch_size))
        leftovers.extend(idx[n_full:])
    batches.extend(leftovers[i : i + batch_size] for i in range(0, len(leftovers), batch_size))

    order = rng.permutation(len(batches))
    plan = BatchPlan([Batch([sessions[i] for i in batches[b]]) for b in order])
    logger.debug("Planned %d batches over %d sessions", len(plan), len(sessions))
    return plan
