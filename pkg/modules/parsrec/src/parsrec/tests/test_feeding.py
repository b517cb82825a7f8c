"""Tests for the modified teacher-forcing rule."""

import numpy as np
import pytest

from parsrec import EmptyBasketError, teacher_force_next


class TestTeacherForceNext:
    def test_prediction_in_basket_is_fed(self):
        assert teacher_force_next(1, {0, 1, 2}, np.random.default_rng(0)) == 1

    def test_last_item_is_forced(self):
        assert teacher_force_next(7, {4}, np.random.default_rng(0)) == 4

    def test_miss_draws_uniformly_from_remaining(self):
        rng = np.random.default_rng(3)
        picks = [teacher_force_next(9, {0, 2}, rng) for _ in range(2000)]
        assert set(picks) == {0, 2}
        assert abs(picks.count(0) / 2000 - 0.5) < 0.05

    def test_same_seed_same_choice(self):
        a = teacher_force_next(9, {5, 1, 3}, np.random.default_rng(11))
        b = teacher_force_next(9, {3, 5, 1}, np.random.default_rng(11))
        assert a == b

    def test_empty_basket_rejected(self):
        with pytest.raises(EmptyBasketError):
            teacher_force_next(0, set(), np.random.default_rng(0))

    def test_feeding_covers_basket_once(self):
        rng = np.random.default_rng(5)
        remaining = {3, 8, 1, 6}
        fed = []
        while remaining:
            item = teacher_force_next(int(rng.integers(10)), remaining, rng)
            assert item in remaining
            remaining.discard(item)
            fed.append(item)
        assert sorted(fed) == [1, 3, 6, 8]
