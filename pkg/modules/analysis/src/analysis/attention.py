"""Collecting per-user attention from teacher-forced unrolls."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
from numerics import Stream, make_rng
from parsrec import ParsRecModel
from tqdm import tqdm
from training import TrainingSession, Unroll, plan_batches, unroll

from .data_models import AttentionAtlas

logger = logging.getLogger(__name__)


def observe_unroll(atlas: AttentionAtlas, model: ParsRecModel, out: Unroll) -> None:
    """Add one unroll's head-averaged weights to ``atlas``.

    Step j's target is the item fed after it; its keys are the items fed
    before it. SOB and EOB keys are skipped, as are padded steps.
    """
    eob = model.config.eob
    users = out.batch.users
    for j, weights in enumerate(out.result.attention):
        mean = weights.mean(axis=1)  # (B, j + 1); position 0 is SOB
        for b, user in enumerate(users):
            target = int(out.fed[b, j])
            if target == eob or j == 0:
                continue
            keys = out.fed[b, :j]
            real = keys != eob
            atlas.add(int(user), target, keys[real], mean[b, 1:][real])


def collect_attention(
    model: ParsRecModel,
    sessions: Sequence[TrainingSession],
    item_category: np.ndarray,
    seed: int = 0,
    batch_size: int = 256,
    progress: bool = True,
) -> AttentionAtlas:
    """Post-hoc pass in eval mode (no dropout) over ``sessions``."""
    atlas = AttentionAtlas(n_items=model.config.n_items, item_category=np.asarray(item_category))
    plan = plan_batches(sessions, batch_size, make_rng(seed, Stream.BATCHING, 0))
    feed_rng = make_rng(seed, Stream.FEEDING, 0)
    for batch in tqdm(plan, desc="Collecting attention", unit="batch", disable=not progress):
        observe_unroll(atlas, model, unroll(model, batch, feed_rng, training=False))
    logger.info("Collected attention for %d users", len(atlas.users))
    return atlas


class TrainingObserver:
    """``fit(on_unroll=...)`` hook that collects attention while training."""

    def __init__(self, n_items: int, item_category: np.ndarray):
        self.atlas = AttentionAtlas(n_items=n_items, item_category=np.asarray(item_category))

    def __call__(self, model: ParsRecModel, out: Unroll) -> None:
        observe_unroll(self.atlas, model, out)
