"""Differentiable primitives.

Every op accepts rank-2 operands and, where it makes sense, a leading batch
axis, so a whole mini-batch can advance through one recurrent step at once.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .errors import IndexRangeError, NonFiniteError, NumericsError, ShapeError
from .tensor import Tensor, record

LN_EPS = 1e-5


def _check_finite(x: np.ndarray, op: str) -> None:
    if not np.isfinite(x).all():
        raise NonFiniteError(f"{op}: input contains NaN or infinity")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product over the last two axes, broadcasting leading axes."""
    if a.data.ndim < 2 or b.data.ndim < 2:
        raise ShapeError(f"matmul needs matrices, got {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul inner dimensions differ: {a.shape} @ {b.shape}")
    out = Tensor.wrap(a.data @ b.data)

    def _backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a.accumulate(g @ np.swapaxes(b.data, -1, -2))
        if b.requires_grad:
            b.accumulate(np.swapaxes(a.data, -1, -2) @ g)

    return record("matmul", (a, b), out, _backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum with numpy broadcasting."""
    out = Tensor.wrap(a.data + b.data)

    def _backward(g: np.ndarray) -> None:
        a.accumulate(g)
        b.accumulate(g)

    return record("add", (a, b), out, _backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise product with numpy broadcasting."""
    out = Tensor.wrap(a.data * b.data)

    def _backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a.accumulate(g * b.data)
        if b.requires_grad:
            b.accumulate(g * a.data)

    return record("mul", (a, b), out, _backward)


def scale(x: Tensor, factor: float) -> Tensor:
    out = Tensor.wrap(x.data * x.data.dtype.type(factor))

    def _backward(g: np.ndarray) -> None:
        x.accumulate(g * factor)

    return record("scale", (x,), out, _backward)


def tensor_sum(x: Tensor) -> Tensor:
    """Sum of all elements as a scalar tensor."""
    out = Tensor.wrap(np.asarray(x.data.sum(), dtype=x.data.dtype))

    def _backward(g: np.ndarray) -> None:
        x.accumulate(np.broadcast_to(g, x.shape))

    return record("sum", (x,), out, _backward)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    """Join tensors along ``axis``."""
    if not tensors:
        raise ShapeError("concat needs at least one tensor")
    parts = tuple(tensors)
    out = Tensor.wrap(np.concatenate([t.data for t in parts], axis=axis))
    bounds = np.cumsum([t.shape[axis] for t in parts])[:-1]

    def _backward(g: np.ndarray) -> None:
        for t, piece in zip(parts, np.split(g, bounds, axis=axis)):
            t.accumulate(piece)

    return record("concat", parts, out, _backward)


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    out = Tensor.wrap(x.data.reshape(shape))

    def _backward(g: np.ndarray) -> None:
        x.accumulate(g.reshape(x.shape))

    return record("reshape", (x,), out, _backward)


def transpose(x: Tensor) -> Tensor:
    """Swap the last two axes."""
    out = Tensor.wrap(np.swapaxes(x.data, -1, -2))

    def _backward(g: np.ndarray) -> None:
        x.accumulate(np.swapaxes(g, -1, -2))

    return record("transpose", (x,), out, _backward)


def row_softmax(x: Tensor) -> Tensor:
    """Softmax over the last axis, stabilized by subtracting the row maximum."""
    _check_finite(x.data, "row_softmax")
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    y = exp / exp.sum(axis=-1, keepdims=True)
    out = Tensor.wrap(y)

    def _backward(g: np.ndarray) -> None:
        x.accumulate(y * (g - (g * y).sum(axis=-1, keepdims=True)))

    return record("row_softmax", (x,), out, _backward)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = LN_EPS) -> Tensor:
    """Normalize the last axis to zero mean / unit variance, then scale and shift."""
    d = x.shape[-1]
    if d < 2:
        raise ShapeError(f"layer_norm needs at least 2 features, got {d}")
    if gain.shape != (d,) or bias.shape != (d,):
        raise ShapeError(f"layer_norm gain/bias must have shape ({d},)")
    mean = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mean
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv_std
    out = Tensor.wrap(xhat * gain.data + bias.data)

    def _backward(g: np.ndarray) -> None:
        if gain.requires_grad:
            gain.accumulate((g * xhat).reshape(-1, d).sum(axis=0))
        if bias.requires_grad:
            bias.accumulate(g.reshape(-1, d).sum(axis=0))
        if x.requires_grad:
            gx = g * gain.data
            x.accumulate(
                inv_std
                * (
                    gx
                    - gx.mean(axis=-1, keepdims=True)
                    - xhat * (gx * xhat).mean(axis=-1, keepdims=True)
                )
            )

    return record("layer_norm", (x, gain, bias), out, _backward)


def relu(x: Tensor) -> Tensor:
    """max(0, x); the subgradient at exactly 0 is 0."""
    mask = x.data > 0
    out = Tensor.wrap(np.where(mask, x.data, 0).astype(x.data.dtype, copy=False))

    def _backward(g: np.ndarray) -> None:
        x.accumulate(g * mask)

    return record("relu", (x,), out, _backward)


def dropout(x: Tensor, p: float, training: bool, rng: np.random.Generator) -> Tensor:
    """Inverted dropout: survivors are scaled by 1/(1-p); eval mode is identity."""
    if not 0.0 <= p < 1.0:
        raise NumericsError(f"dropout probability must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return x
    keep = (rng.random(x.shape) >= p).astype(x.data.dtype)
    keep /= x.data.dtype.type(1.0 - p)
    out = Tensor.wrap(x.data * keep)

    def _backward(g: np.ndarray) -> None:
        x.accumulate(g * keep)

    return record("dropout", (x,), out, _backward)


def _check_rows(indices: np.ndarray, n_rows: int, op: str) -> None:
    if indices.size and (indices.min() < 0 or indices.max() >= n_rows):
        raise IndexRangeError(
            f"{op}: row ids must lie in [0, {n_rows}), got range "
            f"[{indices.min()}, {indices.max()}]"
        )


def embedding_lookup(table: Tensor, indices: np.ndarray | Sequence[int]) -> Tensor:
    """Gather rows of ``table``; output shape is ``indices.shape + (d,)``.

    Backward scatters gradient into the gathered rows only and records them
    on the table for sparse optimizers.
    """
    idx = np.asarray(indices, dtype=np.int64)
    _check_rows(idx, table.shape[0], "embedding_lookup")
    out = Tensor.wrap(table.data[idx])

    def _backward(g: np.ndarray) -> None:
        flat = idx.reshape(-1)
        np.add.at(table.grad, flat, g.reshape(flat.size, -1))
        table.mark_rows(flat)

    return record("embedding_lookup", (table,), out, _backward)


def embedding_bag(table: Tensor, bags: Sequence[Sequence[int]]) -> Tensor:
    """Mean of the rows named by each bag; an empty bag yields a zero row."""
    counts = np.fromiter((len(b) for b in bags), dtype=np.int64, count=len(bags))
    flat = (
        np.concatenate([np.asarray(b, dtype=np.int64) for b in bags if len(b)])
        if counts.sum()
        else np.empty(0, dtype=np.int64)
    )
    _check_rows(flat, table.shape[0], "embedding_bag")
    segment = np.repeat(np.arange(len(bags)), counts)
    weights = np.zeros(len(bags), dtype=table.data.dtype)
    np.divide(1.0, counts, out=weights, where=counts > 0)
    summed = np.zeros((len(bags), table.shape[1]), dtype=table.data.dtype)
    np.add.at(summed, segment, table.data[flat])
    out = Tensor.wrap(summed * weights[:, None])

    def _backward(g: np.ndarray) -> None:
        np.add.at(table.grad, flat, (g * weights[:, None])[segment])
        table.mark_rows(flat)

    return record("embedding_bag", (table,), out, _backward)


def cross_entropy_loss(
    logits: Tensor, targets: np.ndarray | Sequence[int], ignore_id: int
) -> Tensor:
    """Mean of -log softmax(logits)[target] over rows whose target is not ``ignore_id``."""
    if logits.data.ndim != 2:
        raise ShapeError(f"cross_entropy_loss needs (rows, classes) logits, got {logits.shape}")
    m, n_classes = logits.shape
    tgt = np.asarray(targets, dtype=np.int64)
    if tgt.shape != (m,):
        raise ShapeError(f"expected {m} targets, got shape {tgt.shape}")
    keep = tgt != ignore_id
    n_kept = int(keep.sum())
    if n_kept == 0:
        raise NumericsError("cross_entropy_loss: every row is ignored, the mean is undefined")
    _check_rows(tgt[keep], n_classes, "cross_entropy_loss")
    _check_finite(logits.data, "cross_entropy_loss")

    rows = np.flatnonzero(keep)
    z = logits.data[rows]
    shifted = z - z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    picked = shifted[np.arange(n_kept), tgt[rows]]
    loss = (log_norm - picked).mean()
    out = Tensor.wrap(np.asarray(loss, dtype=logits.data.dtype))

    def _backward(g: np.ndarray) -> None:
        probs = np.exp(shifted - log_norm[:, None])
        probs[np.arange(n_kept), tgt[rows]] -= 1.0
        full = np.zeros_like(logits.data)
        full[rows] = probs * (g / n_kept)
        logits.accumulate(full)

    return record("cross_entropy", (logits,), out, _backward)
