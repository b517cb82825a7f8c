"""Scorers: anything that can rank items step by step inside a basket.

A scorer opens a cursor per session. The evaluator alternates
``cursor.scores()`` (one value per real item, higher is better) and
``cursor.feed(item)`` until the basket is exhausted.
"""

from __future__ import annotations

from collections.abc import Sequence
from typing import Protocol

import numpy as np
from numerics import Stream, make_rng
from parsrec import ParsRecModel, StepState, begin_session, item_scores, step
from synth import Session

from .data_models import PopModel


class SessionCursor(Protocol):
    def scores(self) -> np.ndarray: ...

    def feed(self, item: int) -> None: ...


class Scorer(Protocol):
    name: str

    def open_session(self, user: int, history: Sequence[int]) -> SessionCursor: ...


class _ParsRecCursor:
    def __init__(self, model: ParsRecModel, state: StepState):
        self._model = model
        self._state = state
        self._scores: np.ndarray | None = None

    def scores(self) -> np.ndarray:
        if self._scores is None:
            logits, _ = step(self._model, self._state)
            self._scores = item_scores(self._model, logits)[0]
        return self._scores

    def feed(self, item: int) -> None:
        self.scores()  # the recurrent update happens inside the step
        self._state.feed(np.array([item], dtype=np.int64))
        self._scores = None


class ParsRecScorer:
    """Scores items with the model's next-step logits (eval mode)."""

    name = "PARSRec"

    def __init__(self, model: ParsRecModel):
        self.model = model

    def open_session(self, user: int, history: Sequence[int]) -> _ParsRecCursor:
        return _ParsRecCursor(self.model, begin_session(self.model, [user], [list(history)]))


def poprec_fit(sessions: Sequence[Session], n_items: int) -> PopModel:
    """Count item interactions over training sessions."""
    counts = np.zeros(n_items, dtype=np.int64)
    items = [i for s in sessions for i in s.items]
    if items:
        np.add.at(counts, np.asarray(items, dtype=np.int64), 1)
    return PopModel(counts=counts)


def poprec_rank(pop: PopModel, candidates: np.ndarray) -> np.ndarray:
    """Candidates by descending count, ties to the lower id."""
    candidates = np.asarray(candidates, dtype=np.int64)
    order = np.lexsort((candidates, -pop.counts[candidates]))
    return candidates[order]


class _StaticCursor:
    def __init__(self, scores: np.ndarray):
        self._scores = scores

    def scores(self) -> np.ndarray:
        return self._scores

    def feed(self, item: int) -> None:
        pass


class PopRec:
    """Same frequency ranking for every user and step."""

    name = "POPRec"

    def __init__(self, pop: PopModel):
        self.pop = pop
        self._scores = pop.counts.astype(np.float64)

    def open_session(self, user: int, history: Sequence[int]) -> _StaticCursor:
        return _StaticCursor(self._scores)


class _RandomCursor:
    def __init__(self, n_items: int, rng: np.random.Generator):
        self._n_items = n_items
        self._rng = rng
        self._scores: np.ndarray | None = None

    def scores(self) -> np.ndarray:
        if self._scores is None:
            self._scores = self._rng.random(self._n_items)
        return self._scores

    def feed(self, item: int) -> None:
        self._scores = None


class RandomScorer:
    """Fresh uniform scores at every step; the random-ranking floor."""

    name = "Random"

    def __init__(self, n_items: int, seed: int = 0):
        self.n_items = n_items
        self.seed = seed

    def open_session(self, user: int, history: Sequence[int]) -> _RandomCursor:
        # history length tells apart the held-out sessions of one user
        rng = make_rng(self.seed, Stream.SCORING, user, len(history))
        return _RandomCursor(self.n_items, rng)
