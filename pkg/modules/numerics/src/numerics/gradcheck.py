"""Central finite-difference checks for reverse-mode gradients."""

from collections.abc import Callable, Sequence

import numpy as np

from .tensor import Graph, Tensor, backward


def numeric_gradient(fn: Callable[[], Tensor], param: Tensor, step: float = 1e-4) -> np.ndarray:
    """d fn() / d param by central differences, perturbing ``param.data`` in place."""
    grad = np.zeros(param.shape, dtype=np.float64)
    flat = param.data.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + step
        upper = fn().item()
        flat[i] = original - step
        lower = fn().item()
        flat[i] = original
        out[i] = (upper - lower) / (2.0 * step)
    return grad


def gradient_check(
    fn: Callable[[], Tensor],
    params: Sequence[Tensor],
    step: float = 1e-4,
    floor: float = 1e-3,
) -> float:
    """Largest relative error between backward() and finite differences.

    The error of one entry is ``|a - n| / max(|a|, |n|, floor)``; ``floor``
    keeps entries whose true gradient is ~0 from dominating. Run under
    ``float64_mode()`` for tight tolerances. ``fn`` must be deterministic.
    """
    for p in params:
        p.zero_grad()
    with Graph() as graph:
        loss = fn()
    backward(loss, graph)
    worst = 0.0
    for p in params:
        analytic = p.grad.astype(np.float64)
        numeric = numeric_gradient(fn, p, step)
        denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
        worst = max(worst, float((np.abs(analytic - numeric) / denom).max(initial=0.0)))
    return worst
