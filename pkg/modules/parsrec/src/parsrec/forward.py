"""Unrolling sessions through the model and the training loss."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from numerics import Tensor, concat, cross_entropy_loss

from .data_models import ForwardResult, StepState
from .layers import arnn_step, attention_step, history_state
from .model import ParsRecModel


def begin_session(
    model: ParsRecModel, users: Sequence[int] | np.ndarray, histories: Sequence[Sequence[int]]
) -> StepState:
    """Step-0 state: h_0 is the history embedding, the prefix is [SOB]."""
    users = np.asarray(users, dtype=np.int64).reshape(-1)
    if len(histories) != users.shape[0]:
        raise ValueError(f"{users.shape[0]} users but {len(histories)} histories")
    return StepState(
        users=users,
        h=history_state(model, histories),
        prefix=np.full((users.shape[0], 1), model.config.sob, dtype=np.int64),
    )


def step(
    model: ParsRecModel,
    state: StepState,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> tuple[Tensor, np.ndarray]:
    """Advance one step: logits (B, vocab) for the next position and head weights.

    The caller decides the fed item and calls ``state.feed`` before the next step.
    """
    v_tilde, weights, query = attention_step(
        model, state.users, state.h, state.prefix, training, rng
    )
    state.h, logits = arnn_step(model, v_tilde, query)
    return logits, weights


def forward_batch(
    model: ParsRecModel,
    users: Sequence[int] | np.ndarray,
    histories: Sequence[Sequence[int]],
    fed: np.ndarray,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> ForwardResult:
    """Unroll a batch over a fixed fed sequence (B, n); step j sees fed[:, :j] only."""
    fed = np.asarray(fed, dtype=np.int64)
    state = begin_session(model, users, histories)
    result = ForwardResult()
    for j in range(fed.shape[1]):
        logits, weights = step(model, state, training, rng)
        result.logits.append(logits)
        result.attention.append(weights)
        state.feed(fed[:, j])
    return result


def forward_session(
    model: ParsRecModel,
    user: int,
    history: Sequence[int],
    fed: Sequence[int],
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> ForwardResult:
    """Single-session form of ``forward_batch``; one logits row per fed item."""
    return forward_batch(model, [user], [list(history)], np.asarray([fed]), training, rng)


def session_loss(logits: Sequence[Tensor], targets: np.ndarray, eob: int) -> Tensor:
    """Mean cross-entropy over every non-EOB target of the batch.

    ``logits[j]`` is (B, vocab) and ``targets`` is (B, n).
    """
    targets = np.asarray(targets, dtype=np.int64)
    if len(logits) != targets.shape[1]:
        raise ValueError(f"{len(logits)} logit steps but {targets.shape[1]} target columns")
    # rows are step-major: row j * B + b
    return cross_entropy_loss(concat(list(logits), axis=0), targets.T.reshape(-1), ignore_id=eob)


def item_scores(model: ParsRecModel, logits: Tensor) -> np.ndarray:
    """Logits of real items only; SOB and EOB can never be recommended."""
    return logits.data[:, : model.config.n_items]
