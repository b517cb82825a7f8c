"""Data models for the evaluation protocol."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from synth import Session

from .errors import EvalConfigError


class Split(str, Enum):
    VALIDATION = "validation"
    TEST = "test"


@dataclass
class EvalConfig:
    num_candidates: int = 100  # sampled items added to the remaining basket items
    ks: tuple[int, ...] = (1, 5, 10)
    seed: int = 0  # candidate and feeding draws; share it across compared scorers
    min_sessions: int = 3  # users with fewer sessions are excluded
    min_basket: int = 2  # shorter held-out baskets are skipped

    def validate(self) -> None:
        if self.num_candidates < 0:
            raise EvalConfigError(f"num_candidates must be >= 0, got {self.num_candidates}")
        if not self.ks or any(k < 1 for k in self.ks):
            raise EvalConfigError(f"ks must be positive cutoffs, got {self.ks}")
        if self.min_sessions < 3:
            raise EvalConfigError(
                f"min_sessions must be >= 3 (train, validation, test), got {self.min_sessions}"
            )
        if self.min_basket < 2:
            raise EvalConfigError(f"min_basket must be >= 2, got {self.min_basket}")


@dataclass
class UserSplit:
    user: int
    train: list[Session]
    validation: Session
    test: Session

    def history(self, split: Split) -> list[int]:
        """Items of every session before the held-out one, oldest first."""
        past = self.train if split is Split.VALIDATION else [*self.train, self.validation]
        return [item for s in past for item in s.items]

    def held_out(self, split: Split) -> Session:
        return self.validation if split is Split.VALIDATION else self.test


@dataclass
class EvalCase:
    """One held-out basket to predict, with everything the scorer may see."""

    user: int
    t: int
    history: list[int]
    basket: list[int]


@dataclass
class SplitSpec:
    """Leave-last-session partition: test = last, validation = second to last."""

    users: dict[int, UserSplit]
    excluded: list[int] = field(default_factory=list)  # users with too few sessions
    min_basket: int = 2

    def train_sessions(self) -> list[Session]:
        return [s for u in sorted(self.users) for s in self.users[u].train]

    def cases(self, split: Split) -> list[EvalCase]:
        """Held-out baskets of the split, skipping those below ``min_basket``."""
        out = []
        for user in sorted(self.users):
            us = self.users[user]
            session = us.held_out(split)
            if len(session.items) < self.min_basket:
                continue
            out.append(EvalCase(user, session.t, us.history(split), list(session.items)))
        return out


@dataclass
class CandidateSet:
    """Items ranked at one step: sampled negatives/positives plus the remaining basket."""

    items: np.ndarray  # sorted, unique item ids
    n_sampled: int

    def __len__(self) -> int:
        return int(self.items.shape[0])

    def __contains__(self, item: int) -> bool:
        i = np.searchsorted(self.items, item)
        return bool(i < len(self.items) and self.items[i] == item)


@dataclass
class SessionResult:
    """Best rank of a remaining basket item at each step of one session."""

    user: int
    ranks: list[int]

    @property
    def n_steps(self) -> int:
        return len(self.ranks)


@dataclass
class PopModel:
    counts: np.ndarray  # (n_items,) interactions in the training split

    @property
    def n_items(self) -> int:
        return int(self.counts.shape[0])


@dataclass
class MetricsReport:
    hr: dict[int, float]
    ndcg: dict[int, float]
    sess_prec: dict[int, float]
    steps: int
    sessions: int

    def rows(self) -> list[tuple[str, int, float]]:
        """``(metric, k, value)`` in a fixed order."""
        out = []
        for metric, values in (("HR", self.hr), ("NDCG", self.ndcg), ("SessPrec", self.sess_prec)):
            out.extend((metric, k, values[k]) for k in sorted(values))
        return out
