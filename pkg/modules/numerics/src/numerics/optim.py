"""Adam, row-sparse Adam and global-norm gradient clipping."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import IndexRangeError, NonFiniteError, OptimizerError
from .tensor import Tensor

logger = logging.getLogger(__name__)


@dataclass
class OptimizerState:
    """Moment accumulators and step counters for one optimizer."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    mode: Literal["dense", "sparse-rows"] = "dense"
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    row_steps: dict[str, np.ndarray] = field(default_factory=dict)  # sparse mode only

    def ensure(self, name: str, param: Tensor) -> None:
        if name not in self.m:
            self.m[name] = np.zeros_like(param.data)
            self.v[name] = np.zeros_like(param.data)
            if self.mode == "sparse-rows":
                self.row_steps[name] = np.zeros(param.shape[0], dtype=np.int64)


def clip_global_norm(params: Iterable[Tensor], max_norm: float = 30.0) -> float:
    """Rescale all gradients so their joint L2 norm is at most ``max_norm``.

    Returns the factor applied (1.0 when the norm was already small enough).
    """
    grads = [p.grad for p in params if p.grad is not None]
    total = float(np.sqrt(sum(float(np.square(g, dtype=np.float64).sum()) for g in grads)))
    if not np.isfinite(total):
        raise NonFiniteError("gradient norm is not finite")
    if total <= max_norm * (1.0 + 1e-6):
        return 1.0
    factor = max_norm / total
    for g in grads:
        g *= g.dtype.type(factor)
    logger.debug("Clipped gradient norm %.3f to %.1f", total, max_norm)
    return factor


def adam_step(state: OptimizerState, params: Mapping[str, Tensor]) -> None:
    """Bias-corrected Adam update of every parameter in ``params``."""
    if not params:
        raise OptimizerError("adam_step called with no parameters")
    state.t += 1
    bc1 = 1.0 - state.beta1**state.t
    bc2 = 1.0 - state.beta2**state.t
    for name, p in params.items():
        state.ensure(name, p)
        g = p.grad
        m, v = state.m[name], state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p.data -= (state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)).astype(
            p.data.dtype, copy=False
        )


def sparse_adam_step(
    state: OptimizerState,
    name: str,
    embedding: Tensor,
    touched_rows: Iterable[int] | np.ndarray,
) -> None:
    """Adam update restricted to ``touched_rows``; other rows and moments stay put.

    Each row keeps its own step counter, advanced only when the row is touched.
    """
    if not isinstance(touched_rows, np.ndarray):
        touched_rows = np.fromiter(touched_rows, dtype=np.int64)
    rows = np.unique(touched_rows.astype(np.int64, copy=False))
    if rows.size and (rows[0] < 0 or rows[-1] >= embedding.shape[0]):
        raise IndexRangeError(
            f"sparse_adam_step: rows must lie in [0, {embedding.shape[0]}) for {name!r}"
        )
    state.ensure(name, embedding)
    state.t += 1
    if rows.size == 0:
        return
    steps = state.row_steps[name]
    steps[rows] += 1
    t = steps[rows][:, None].astype(np.float64)
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    g = embedding.grad[rows]
    m = state.m[name][rows] * state.beta1 + (1.0 - state.beta1) * g
    v = state.v[name][rows] * state.beta2 + (1.0 - state.beta2) * (g * g)
    state.m[name][rows] = m
    state.v[name][rows] = v
    update = state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    embedding.data[rows] -= update.astype(embedding.data.dtype, copy=False)


class Adam:
    """Dense Adam over a named parameter set."""

    def __init__(
        self,
        params: Mapping[str, Tensor],
        lr: float = 1e-3,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
    ):
        self.params = dict(params)
        self.state = OptimizerState(lr=lr, beta1=betas[0], beta2=betas[1], eps=eps)

    def step(self) -> None:
        adam_step(self.state, self.params)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()


class SparseAdam:
    """Row-sparse Adam for embedding tables: only rows that saw gradient move."""

    def __init__(
        self,
        tables: Mapping[str, Tensor],
        lr: float = 1e-3,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
    ):
        self.tables = dict(tables)
        # one clock per table: each state advances exactly once per step
        self.states = {
            name: OptimizerState(
                lr=lr, beta1=betas[0], beta2=betas[1], eps=eps, mode="sparse-rows"
            )
            for name in self.tables
        }

    def step(self) -> None:
        for name, table in self.tables.items():
            sparse_adam_step(self.states[name], name, table, table.touched_rows)

    def zero_grad(self) -> None:
        for table in self.tables.values():
            table.zero_grad()
