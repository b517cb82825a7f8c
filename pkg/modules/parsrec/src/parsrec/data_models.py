"""Data models for the recommender: architecture config and unroll state."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from numerics import Tensor

from .errors import ModelConfigError


@dataclass(frozen=True)
class ModelConfig:
    """Architecture and ablation switches.

    Token ids: real items are ``0..n_items-1``, then SOB and EOB.
    """

    n_items: int
    d_u: int = 32
    d_v: int = 32
    heads: int = 2
    layers: int = 1
    dropout: float = 0.1
    # ablation switches (all True/False defaults are the full model)
    use_ln: bool = True
    use_dropout: bool = True
    add_q_at_ln: bool = True  # residual of the hidden state before LN
    ffn_pre_rnn: bool = False
    ffn_post_rnn: bool = False

    @property
    def d_q(self) -> int:
        return self.d_u + self.d_v

    @property
    def d_k(self) -> int:
        return self.d_v

    @property
    def sob(self) -> int:
        return self.n_items

    @property
    def eob(self) -> int:
        return self.n_items + 1

    @property
    def vocab_size(self) -> int:
        return self.n_items + 2

    def variant(self, **changes) -> ModelConfig:
        """Copy with some fields changed, validated."""
        config = replace(self, **changes)
        config.validate()
        return config

    def validate(self) -> None:
        if self.n_items < 1:
            raise ModelConfigError(f"n_items must be >= 1, got {self.n_items}")
        if self.d_u < 1 or self.d_v < 1:
            raise ModelConfigError(
                f"embedding sizes must be >= 1, got d_u={self.d_u}, d_v={self.d_v}"
            )
        if self.use_ln and self.d_v < 2:
            raise ModelConfigError("layer normalization needs d_v >= 2")
        if self.heads < 1:
            raise ModelConfigError(f"heads must be >= 1, got {self.heads}")
        if self.layers < 1:
            raise ModelConfigError(f"layers must be >= 1, got {self.layers}")
        if not 0.0 <= self.dropout < 1.0:
            raise ModelConfigError(f"dropout must be in [0, 1), got {self.dropout}")


@dataclass
class StepState:
    """Recurrent state of a batch of sessions between steps.

    ``prefix`` holds the fed token ids per session, starting with SOB, so at
    step j it has j + 1 columns.
    """

    users: np.ndarray  # (B,)
    h: Tensor  # (B, 1, d_v)
    prefix: np.ndarray  # (B, j + 1)

    @property
    def step(self) -> int:
        return self.prefix.shape[1] - 1

    @property
    def batch_size(self) -> int:
        return self.users.shape[0]

    def feed(self, items: np.ndarray) -> None:
        """Append one fed token per session."""
        items = np.asarray(items, dtype=np.int64).reshape(self.batch_size, 1)
        self.prefix = np.concatenate([self.prefix, items], axis=1)


@dataclass
class ForwardResult:
    """Per-step outputs of an unroll.

    ``logits[j]`` is (B, vocab) and predicts position j + 1; ``attention[j]``
    is (B, heads, j + 1), the top layer's weights over the prefix.
    """

    logits: list[Tensor] = field(default_factory=list)
    attention: list[np.ndarray] = field(default_factory=list)
