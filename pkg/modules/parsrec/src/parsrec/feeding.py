"""Choosing the next fed item inside an unordered basket."""

from __future__ import annotations

from collections.abc import Collection

import numpy as np

from .errors import EmptyBasketError


def teacher_force_next(
    predicted: int, remaining: Collection[int], rng: np.random.Generator
) -> int:
    """Feed the prediction if it is still in the basket, else a random remaining item.

    The caller removes the returned item from ``remaining``.
    """
    if not remaining:
        raise EmptyBasketError("teacher_force_next needs at least one remaining item")
    if predicted in remaining:
        return int(predicted)
    # sorted: the draw must not depend on set iteration order
    pool = sorted(remaining)
    return int(pool[rng.integers(len(pool))])
