"""Tests for training examples, batch planning and teacher-forced unrolls."""

import numpy as np
from evaluation import make_splits
from parsrec import ModelConfig, init_model
from synth import Dataset, Session

from training import Batch, TrainingSession, plan_batches, training_sessions, unroll


def _toy_dataset(n_users: int = 6, n_items: int = 12, sessions: int = 5, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    out = []
    for u in range(n_users):
        for t in range(1, sessions + 1):
            size = int(rng.integers(2, 5))
            out.append(Session(u, t, tuple(rng.choice(n_items, size=size, replace=False).tolist())))
    return Dataset(
        sessions=out,
        item_category=np.arange(n_items) % 3,
        user_group=np.arange(n_users) % 2,
        group_sigma=np.stack([np.eye(3), np.eye(3)]),
    )


def _sessions_of_size(sizes: list[int]) -> list[TrainingSession]:
    return [
        TrainingSession(user=i, t=1, history=(), items=tuple(range(size)))
        for i, size in enumerate(sizes)
    ]


class TestTrainingSessions:
    def test_history_is_earlier_train_baskets(self):
        ds = Dataset(
            sessions=[Session(0, t, (t, t + 10)) for t in range(1, 6)],
            item_category=np.zeros(20, dtype=np.int64),
            user_group=np.zeros(1, dtype=np.int64),
            group_sigma=np.eye(1)[None],
        )
        sessions = training_sessions(make_splits(ds))
        assert [s.t for s in sessions] == [1, 2, 3]
        assert sessions[0].history == ()
        assert sessions[2].history == (1, 11, 2, 12)

    def test_held_out_sessions_not_trained(self):
        ds = _toy_dataset()
        sessions = training_sessions(make_splits(ds))
        assert len(sessions) == 6 * 3
        assert all(s.t <= 3 for s in sessions)


class TestPlanBatches:
    def test_uniform_sizes(self):
        plan = plan_batches(_sessions_of_size([3] * 10), 4, np.random.default_rng(0))
        assert sorted(len(b) for b in plan) == [2, 4, 4]
        assert all(b.length == 3 for b in plan)
        assert not any(b.pad_mask.any() for b in plan)

    def test_single_session(self):
        plan = plan_batches(_sessions_of_size([5]), 256, np.random.default_rng(0))
        assert len(plan) == 1
        assert plan.n_sessions == 1

    def test_every_session_exactly_once(self):
        rng = np.random.default_rng(1)
        sessions = _sessions_of_size(rng.integers(2, 9, size=300).tolist())
        plan = plan_batches(sessions, 16, rng)
        seen = sorted(s.user for b in plan for s in b.sessions)
        assert seen == list(range(300))

    def test_only_leftovers_mix_sizes(self):
        sessions = _sessions_of_size([2] * 9 + [3] * 9 + [4] * 2)
        plan = plan_batches(sessions, 4, np.random.default_rng(2))
        mixed = [b for b in plan if len({len(s.items) for s in b.sessions}) > 1]
        full = [b for b in plan if b not in mixed]
        assert all(len(b) == 4 for b in full)
        # leftovers: one of size 2, one of size 3, two of size 4
        assert sum(len(b) for b in mixed) <= 4
        for b in mixed:
            sizes = np.array([len(s.items) for s in b.sessions])
            np.testing.assert_array_equal(b.pad_mask.sum(axis=1), b.length - sizes)

    def test_seeded(self):
        sessions = _sessions_of_size([2, 3, 2, 3, 4, 2, 2])
        a, b = (plan_batches(sessions, 2, np.random.default_rng(5)) for _ in range(2))
        assert [[s.user for s in x.sessions] for x in a] == [
            [s.user for s in x.sessions] for x in b
        ]


class TestUnroll:
    def _batch(self) -> Batch:
        return Batch(
            [
                TrainingSession(0, 1, (1, 2), (3, 7, 5)),
                TrainingSession(1, 1, (), (0, 4)),
            ]
        )

    def test_feeds_each_basket_item_once(self):
        model = init_model(ModelConfig(n_items=8, d_u=4, d_v=4), 2, np.random.default_rng(0))
        out = unroll(model, self._batch(), np.random.default_rng(1), training=False)
        assert sorted(out.fed[0].tolist()) == [3, 5, 7]
        assert sorted(out.fed[1, :2].tolist()) == [0, 4]
        assert out.fed[1, 2] == model.config.eob
        assert len(out.result.logits) == 3

    def test_greedy_prediction_fed_when_in_basket(self):
        model = init_model(ModelConfig(n_items=8, d_u=4, d_v=4), 2, np.random.default_rng(0))
        model["out.w3"].data[...] = 0
        model["out.w4"].data[...] = 0
        model["out.b2"].data[...] = 0
        model["out.b2"].data[5] = 10.0
        out = unroll(model, self._batch(), np.random.default_rng(1), training=False)
        assert out.fed[0, 0] == 5

    def test_seeded_fallback(self):
        model = init_model(ModelConfig(n_items=8, d_u=4, d_v=4), 2, np.random.default_rng(3))
        a = unroll(model, self._batch(), np.random.default_rng(9), training=False)
        b = unroll(model, self._batch(), np.random.default_rng(9), training=False)
        np.testing.assert_array_equal(a.fed, b.fed)
