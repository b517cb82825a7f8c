"""Tests for ranking, metric aggregation, scorers and the evaluation driver."""

import csv
import math

import numpy as np
import pytest
from parsrec import ModelConfig, forward_session, init_model, item_scores
from synth import Dataset, Session

from evaluation import (
    CandidateSampler,
    EmptyEvaluationError,
    EvalConfig,
    ParsRecScorer,
    PopModel,
    PopRec,
    RandomScorer,
    SessionResult,
    Split,
    aggregate_metrics,
    best_rank,
    evaluate_model,
    evaluate_session,
    format_metrics_table,
    make_splits,
    poprec_fit,
    poprec_rank,
    rank_candidates,
    write_metrics_csv,
)


class _OracleCursor:
    def __init__(self, scores: np.ndarray):
        self._scores = scores

    def scores(self) -> np.ndarray:
        return self._scores

    def feed(self, item: int) -> None:
        self._scores[item] = 0.0


class _OracleScorer:
    """Knows every held-out basket and scores its unfed items highest."""

    name = "Oracle"

    def __init__(self, n_items: int, baskets: dict[int, list[list[int]]]):
        self.n_items = n_items
        self.baskets = baskets

    def open_session(self, user, history):
        scores = np.zeros(self.n_items)
        for basket in self.baskets[user]:
            scores[basket] = 1.0
        return _OracleCursor(scores)


def _random_dataset(n_users: int, n_items: int, basket: int, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    sessions = [
        Session(u, t, tuple(rng.choice(n_items, size=basket, replace=False).tolist()))
        for u in range(n_users)
        for t in range(1, 4)
    ]
    return Dataset(
        sessions=sessions,
        item_category=np.arange(n_items) % 4,
        user_group=np.zeros(n_users, dtype=np.int64),
        group_sigma=np.eye(4)[None],
    )


def _random_floor(basket: int, num_candidates: int = 100, k: int = 10) -> float:
    """Expected HR@k over the steps of one basket when scores are random."""
    per_step = []
    for r in range(basket, 0, -1):
        miss = math.comb(num_candidates, k) / math.comb(num_candidates + r, k)
        per_step.append(1 - miss)
    return float(np.mean(per_step))


class TestRanking:
    def test_descending_with_ties_to_lower_id(self):
        scores = np.array([0.5, 0.9, 0.5, 0.1, 0.9])
        ranked = rank_candidates(scores, np.array([0, 1, 2, 3, 4]))
        np.testing.assert_array_equal(ranked, [1, 4, 0, 2, 3])

    def test_only_candidates_ranked(self):
        scores = np.arange(10, dtype=float)
        np.testing.assert_array_equal(rank_candidates(scores, np.array([2, 7, 5])), [7, 5, 2])

    def test_best_rank_among_remaining(self):
        assert best_rank(np.array([8, 3, 6, 1]), {1, 6}) == 3


class TestAggregateMetrics:
    def test_rank_four_closed_form(self):
        report = aggregate_metrics([SessionResult(0, [4])], ks=(1, 5))
        assert report.hr == {1: 0.0, 5: 1.0}
        assert report.ndcg[5] == pytest.approx(1 / math.log2(5))
        assert report.ndcg[5] == pytest.approx(0.4307, abs=1e-4)

    def test_rank_one_full_credit(self):
        report = aggregate_metrics([SessionResult(0, [1])], ks=(1, 5))
        assert report.hr[1] == report.ndcg[5] == 1.0

    def test_rank_eleven_misses_top_ten(self):
        report = aggregate_metrics([SessionResult(0, [11])], ks=(10,))
        assert report.hr[10] == report.ndcg[10] == report.sess_prec[10] == 0.0

    def test_session_precision_normalized_by_basket(self):
        report = aggregate_metrics([SessionResult(0, [1, 3, 7])], ks=(5,))
        assert report.sess_prec[5] == pytest.approx(2 / 3)

    def test_session_precision_averages_sessions(self):
        report = aggregate_metrics([SessionResult(0, [1, 1]), SessionResult(1, [20, 30, 40])])
        assert report.sess_prec[10] == pytest.approx(0.5)
        assert report.hr[10] == pytest.approx(2 / 5)
        assert (report.steps, report.sessions) == (5, 2)

    def test_perfect_ranks(self):
        report = aggregate_metrics([SessionResult(0, [1, 1, 1])])
        assert all(v == 1.0 for _, _, v in report.rows())

    def test_ordering_invariants(self):
        rng = np.random.default_rng(0)
        results = [SessionResult(u, rng.integers(1, 30, size=4).tolist()) for u in range(50)]
        report = aggregate_metrics(results, ks=(1, 5, 10))
        assert report.hr[1] == report.ndcg[1]
        for k in (1, 5, 10):
            assert 0.0 <= report.ndcg[k] <= report.hr[k] <= 1.0

    def test_empty_rejected(self):
        with pytest.raises(EmptyEvaluationError):
            aggregate_metrics([])


class TestPopRec:
    def test_counts_and_ranking(self):
        sessions = [Session(0, 1, (0, 1)), Session(0, 2, (0, 1)), Session(1, 1, (0, 2))]
        pop = poprec_fit(sessions, n_items=4)
        np.testing.assert_array_equal(pop.counts, [3, 2, 1, 0])
        np.testing.assert_array_equal(poprec_rank(pop, np.array([3, 2, 1, 0])), [0, 1, 2, 3])

    def test_ties_to_lower_id(self):
        pop = PopModel(counts=np.array([0, 2, 2, 0]))
        np.testing.assert_array_equal(poprec_rank(pop, np.array([3, 2, 1, 0])), [1, 2, 0, 3])

    def test_ever_present_item_ranks_first(self):
        sessions = [Session(u, t, (0, 1 + (u + t) % 5)) for u in range(4) for t in range(1, 4)]
        pop = PopRec(poprec_fit(sessions, n_items=6))
        sampler = CandidateSampler(6, num_candidates=100)
        result = evaluate_session(pop, 0, [], [3, 0], sampler, np.random.default_rng(0))
        assert result.ranks[0] == 1


class TestEvaluateSession:
    def test_one_rank_per_basket_item(self):
        sampler = CandidateSampler(50, num_candidates=10)
        scorer = RandomScorer(50)
        result = evaluate_session(scorer, 0, [1], [4, 9, 12], sampler, np.random.default_rng(0))
        assert result.n_steps == 3
        assert all(1 <= r <= 13 for r in result.ranks)

    def test_parsrec_cursor_matches_forward(self):
        model = init_model(ModelConfig(n_items=8, d_u=4, d_v=4), 2, np.random.default_rng(0))
        cursor = ParsRecScorer(model).open_session(1, [2, 3])
        first = cursor.scores().copy()
        cursor.feed(5)
        second = cursor.scores()
        out = forward_session(model, 1, [2, 3], [5, 0])
        np.testing.assert_array_equal(first, item_scores(model, out.logits[0])[0])
        np.testing.assert_array_equal(second, item_scores(model, out.logits[1])[0])
        assert first.shape == (8,)


class TestEvaluateModel:
    def test_oracle_scores_perfectly(self):
        ds = _random_dataset(n_users=20, n_items=300, basket=4)
        splits = make_splits(ds)
        baskets = {u: [list(us.test.items)] for u, us in splits.users.items()}
        oracle = _OracleScorer(300, baskets)
        report = evaluate_model(oracle, splits, Split.TEST, 300, progress=False)
        assert all(v == 1.0 for _, _, v in report.rows())
        assert report.steps == 80

    def test_random_floor(self):
        ds = _random_dataset(n_users=1250, n_items=2000, basket=4, seed=1)
        splits = make_splits(ds)
        report = evaluate_model(
            RandomScorer(2000, seed=5), splits, Split.TEST, 2000, EvalConfig(seed=5), progress=False
        )
        assert report.steps == 5000
        assert report.hr[10] == pytest.approx(_random_floor(4), abs=0.02)

    def test_same_seed_same_report(self):
        ds = _random_dataset(n_users=30, n_items=200, basket=3, seed=2)
        splits = make_splits(ds)
        pop = PopRec(poprec_fit(splits.train_sessions(), 200))
        a = evaluate_model(pop, splits, Split.VALIDATION, 200, EvalConfig(seed=9), progress=False)
        b = evaluate_model(pop, splits, Split.VALIDATION, 200, EvalConfig(seed=9), progress=False)
        assert a == b

    def test_model_untouched(self):
        ds = _random_dataset(n_users=6, n_items=30, basket=3, seed=3)
        splits = make_splits(ds)
        model = init_model(ModelConfig(n_items=30, d_u=4, d_v=4), 6, np.random.default_rng(0))
        before = model.state_arrays()
        evaluate_model(ParsRecScorer(model), splits, Split.TEST, 30, progress=False)
        for name, array in model.state_arrays().items():
            np.testing.assert_array_equal(array, before[name])
            assert not model[name].grad.any()

    def test_invalid_config_rejected(self):
        ds = _random_dataset(n_users=3, n_items=30, basket=2)
        with pytest.raises(ValueError):
            evaluate_model(RandomScorer(30), make_splits(ds), Split.TEST, 30, EvalConfig(ks=(0,)))


class TestReport:
    def test_csv_layout(self, tmp_path):
        report = aggregate_metrics([SessionResult(0, [1, 4]), SessionResult(1, [2, 12])])
        path = tmp_path / "metrics.csv"
        write_metrics_csv(report, path)
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["metric", "k", "value", "steps", "sessions"]
        assert rows[1] == ["HR", "1", "0.250000", "4", "2"]
        assert len(rows) == 1 + 9

    def test_table_has_a_column_per_scorer(self):
        report = aggregate_metrics([SessionResult(0, [1, 4])])
        table = format_metrics_table({"PARSRec": report, "POPRec": report})
        assert "PARSRec" in table.splitlines()[0]
        assert "NDCG@10" in table
