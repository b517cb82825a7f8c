"""Tensor type and the reverse-mode tape.

A ``Graph`` records primitive operations while it is active::

    with Graph() as graph:
        loss = cross_entropy_loss(logits_fn(params), targets, ignore_id=eob)
    backward(loss, graph)

Operations only record when a graph is active and at least one input
requires a gradient, so inference code pays nothing for the tape.
"""

from __future__ import annotations

import contextlib
import logging
from collections.abc import Callable, Iterator
from contextvars import ContextVar, Token
from dataclasses import dataclass

import numpy as np

from .errors import GraphError, ShapeError

logger = logging.getLogger(__name__)

_DTYPE: ContextVar[type[np.floating]] = ContextVar("numerics_dtype", default=np.float32)
_ACTIVE_GRAPH: ContextVar["Graph | None"] = ContextVar("numerics_graph", default=None)


def default_dtype() -> type[np.floating]:
    """Floating dtype new tensors are created with in the current context."""
    return _DTYPE.get()


@contextlib.contextmanager
def float64_mode() -> Iterator[None]:
    """Create tensors in 64-bit precision inside the block (gradient checking)."""
    token = _DTYPE.set(np.float64)
    try:
        yield
    finally:
        _DTYPE.reset(token)


class Tensor:
    """Dense row-major array with an optional gradient accumulator.

    ``grad`` exists exactly when ``requires_grad`` is set and always has the
    shape of ``data``. Embedding tables additionally remember which rows
    received gradient since the last ``zero_grad`` (``touched_rows``).
    """

    __slots__ = ("data", "grad", "requires_grad", "name", "_touched")

    def __init__(
        self,
        data: np.ndarray | list | float,
        requires_grad: bool = False,
        name: str | None = None,
    ):
        self.data: np.ndarray = np.array(data, dtype=default_dtype())
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = np.zeros_like(self.data) if requires_grad else None
        self.name = name
        self._touched: list[np.ndarray] = []

    @classmethod
    def wrap(cls, data: np.ndarray) -> Tensor:
        """Wrap an op result without copying or casting."""
        obj = cls.__new__(cls)
        obj.data = data
        obj.requires_grad = False
        obj.grad = None
        obj.name = None
        obj._touched = []
        return obj

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        flag = " requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype}{label}{flag})"

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single value, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    @property
    def touched_rows(self) -> np.ndarray:
        """Sorted unique row ids that received gradient since ``zero_grad``."""
        if not self._touched:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate(self._touched))

    def mark_rows(self, rows: np.ndarray) -> None:
        self._touched.append(np.asarray(rows, dtype=np.int64).reshape(-1))

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad.fill(0)
        self._touched.clear()

    def accumulate(self, grad: np.ndarray) -> None:
        """Add ``grad`` (broadcast-reduced to this shape) into ``self.grad``."""
        if not self.requires_grad:
            return
        self.grad += unbroadcast(grad, self.shape)


def unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` over the axes that broadcasting expanded from ``shape``."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


@dataclass
class Node:
    """One executed primitive: its inputs, output and gradient rule."""

    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: Callable[[np.ndarray], None]


class Graph:
    """Ordered record of primitive operations executed while active."""

    def __init__(self) -> None:
        self.nodes: list[Node] = []
        self._token: Token | None = None

    def __enter__(self) -> Graph:
        self._token = _ACTIVE_GRAPH.set(self)
        return self

    def __exit__(self, *exc_info) -> None:
        if self._token is not None:
            _ACTIVE_GRAPH.reset(self._token)
            self._token = None

    def __len__(self) -> int:
        return len(self.nodes)


def record(
    op: str,
    inputs: tuple[Tensor, ...],
    output: Tensor,
    backward_fn: Callable[[np.ndarray], None],
) -> Tensor:
    """Attach ``output`` to the active graph if any input needs a gradient."""
    graph = _ACTIVE_GRAPH.get()
    if graph is None or not any(t.requires_grad for t in inputs):
        return output
    output.requires_grad = True
    output.grad = np.zeros_like(output.data)
    graph.nodes.append(Node(op=op, inputs=inputs, output=output, backward=backward_fn))
    return output


def backward(loss: Tensor, graph: Graph | None) -> None:
    """Propagate d(loss)/d(tensor) into every reachable ``requires_grad`` tensor.

    Nodes are replayed in reverse execution order, which is a reverse
    topological order of the tape. The tape is consumed.
    """
    if graph is None or not graph.nodes:
        raise GraphError("backward() needs a graph holding a recorded forward pass")
    if loss.size != 1:
        raise ShapeError(f"backward() needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        raise GraphError("loss does not depend on any tensor that requires a gradient")
    loss.grad += 1
    logger.debug("Backward over %d recorded ops", len(graph.nodes))
    for node in reversed(graph.nodes):
        node.backward(node.output.grad)
    graph.nodes.clear()
