"""Data models for training: config, batches, per-epoch history."""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np
from parsrec import ForwardResult, ParsRecModel

from .errors import TrainConfigError


@dataclass
class TrainConfig:
    batch_size: int = 256
    max_epochs: int = 100
    patience: int = 10  # epochs without validation NDCG@10 improvement
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    clip_norm: float = 30.0
    seed: int = 0
    eval_every: int = 1  # epochs between validation runs

    def validate(self) -> None:
        if self.batch_size < 1:
            raise TrainConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_epochs < 1:
            raise TrainConfigError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.patience < 1:
            raise TrainConfigError(f"patience must be >= 1, got {self.patience}")
        if self.lr < 0:
            raise TrainConfigError(f"lr must be >= 0, got {self.lr}")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise TrainConfigError(f"Adam betas must be in [0, 1), got {self.beta1}, {self.beta2}")
        if self.clip_norm <= 0:
            raise TrainConfigError(f"clip_norm must be > 0, got {self.clip_norm}")
        if self.eval_every < 1:
            raise TrainConfigError(f"eval_every must be >= 1, got {self.eval_every}")


@dataclass(frozen=True)
class TrainingSession:
    """One training basket with the items of the user's earlier sessions."""

    user: int
    t: int
    history: tuple[int, ...]
    items: tuple[int, ...]


@dataclass
class Batch:
    """Sessions unrolled together; shorter baskets are padded with EOB."""

    sessions: list[TrainingSession]

    @property
    def users(self) -> np.ndarray:
        return np.array([s.user for s in self.sessions], dtype=np.int64)

    @property
    def histories(self) -> list[list[int]]:
        return [list(s.history) for s in self.sessions]

    @property
    def length(self) -> int:
        return max(len(s.items) for s in self.sessions)

    @property
    def pad_mask(self) -> np.ndarray:
        """(B, length) True where the step is padding."""
        sizes = np.array([len(s.items) for s in self.sessions])
        return np.arange(self.length)[None, :] >= sizes[:, None]

    def __len__(self) -> int:
        return len(self.sessions)


@dataclass
class BatchPlan:
    batches: list[Batch]

    def __iter__(self) -> Iterator[Batch]:
        return iter(self.batches)

    def __len__(self) -> int:
        return len(self.batches)

    @property
    def n_sessions(self) -> int:
        return sum(len(b) for b in self.batches)


@dataclass
class Unroll:
    """One teacher-forced pass over a batch.

    ``fed[:, j]`` is the item fed after step j and is also the target of
    step j's logits; EOB marks padding.
    """

    batch: Batch
    fed: np.ndarray  # (B, n)
    result: ForwardResult


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    hr10: float = float("nan")
    ndcg10: float = float("nan")
    sessprec10: float = float("nan")


@dataclass
class TrainingHistory:
    records: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_metric: float = float("-inf")
    stopped_early: bool = False
    # optimizer state at the best epoch, as Optimizers.state_arrays returns it
    optimizer_arrays: dict[str, np.ndarray] = field(default_factory=dict)
    optimizer_steps: dict[str, int] = field(default_factory=dict)


@dataclass
class Checkpoint:
    model: ParsRecModel
    epoch: int = 0
    best_metric: float = float("nan")
    optimizer_arrays: dict[str, np.ndarray] = field(default_factory=dict)
    optimizer_steps: dict[str, int] = field(default_factory=dict)
