"""Desk-scale acceptance runs: train once on the default market, then check what it learned.

Deselected by default; ``just test-all`` runs them.
"""

import math

import numpy as np
import pytest
from analysis import (
    block_labels,
    collect_attention,
    group_heatmaps,
    sign_agreement,
    spillover_experiment,
    structure_scores,
)
from evaluation import (
    ParsRecScorer,
    PopRec,
    RandomScorer,
    Split,
    evaluate_model,
    make_splits,
    poprec_fit,
)
from numerics import Stream, make_rng
from parsrec import init_model
from synth import synthesize, validate_dataset
from training import fit, training_sessions

from lab import load_config

pytestmark = pytest.mark.slow


def _random_floor(basket_sizes: list[int], num_candidates: int = 100, k: int = 10) -> float:
    """Expected HR@k of random ranking, averaged over the steps of the given baskets."""
    per_step = [
        1 - math.comb(num_candidates, k) / math.comb(num_candidates + r, k)
        for n in basket_sizes
        for r in range(n, 0, -1)
    ]
    return float(np.mean(per_step))


@pytest.fixture(scope="module")
def desk():
    config = load_config(None, ["train.max_epochs=30"], environ={})
    ds = synthesize(config.synth, progress=False)
    splits = make_splits(ds)
    model_config = config.model.variant(n_items=ds.n_items)
    untrained = init_model(model_config, ds.n_users, make_rng(config.seed, Stream.INIT))
    model = init_model(model_config, ds.n_users, make_rng(config.seed, Stream.INIT))
    fit(model, splits, config.train, config.eval, progress=False)
    return config, ds, splits, untrained, model


class TestDeskAcceptance:
    def test_dataset_valid(self, desk):
        _, ds, _, _, _ = desk
        assert validate_dataset(ds) == []

    def test_untrained_model_at_random_floor(self, desk):
        config, ds, splits, untrained, _ = desk
        report = evaluate_model(
            ParsRecScorer(untrained), splits, Split.TEST, ds.n_items, config.eval, progress=False
        )
        floor = _random_floor([len(c.basket) for c in splits.cases(Split.TEST)])
        assert report.steps >= 5_000
        assert report.hr[10] == pytest.approx(floor, abs=0.03)

    def test_beats_poprec_everywhere(self, desk):
        config, ds, splits, _, model = desk
        reports = {
            scorer.name: evaluate_model(
                scorer, splits, Split.TEST, ds.n_items, config.eval, progress=False
            )
            for scorer in (
                ParsRecScorer(model),
                PopRec(poprec_fit(splits.train_sessions(), ds.n_items)),
                RandomScorer(ds.n_items, config.eval.seed),
            )
        }
        ours, pop, rnd = reports["PARSRec"], reports["POPRec"], reports["Random"]
        for metric, k, value in ours.rows():
            baseline = {(m, kk): v for m, kk, v in pop.rows()}[(metric, k)]
            assert value > baseline, (metric, k)
        assert ours.hr[10] >= 2 * pop.hr[10]
        assert ours.hr[10] >= 2.5 * rnd.hr[10]

    def test_attention_recovers_structure(self, desk):
        config, ds, splits, _, model = desk
        atlas = collect_attention(
            model, training_sessions(splits), ds.item_category, seed=config.seed, progress=False
        )
        heatmaps = group_heatmaps(atlas, ds.user_group)
        blocks = block_labels(ds.group_sigma)
        scores = structure_scores(heatmaps.groups[0].matrix, ds.group_sigma[0], blocks)
        assert scores["positive"] - scores["independent"] >= 0.02
        assert scores["positive"] > scores["negative"]
        share, n = sign_agreement(
            heatmaps.differences[(0, 1)].matrix, ds.group_sigma[0], ds.group_sigma[1]
        )
        assert n > 0
        assert share >= 0.7

    def test_spillover_direction(self, desk):
        config, ds, splits, _, model = desk
        settings = config.analysis
        report = spillover_experiment(
            model,
            splits,
            ds.item_category,
            ds.user_group,
            removed_category=settings.removed_category,
            top_k=settings.top_k,
            seed=config.seed,
            progress=False,
        )
        change_a = report.row(0, settings.correlated_category).change_per_session
        change_b = report.row(1, settings.correlated_category).change_per_session
        assert change_a < 0
        assert abs(change_a) >= 2 * abs(change_b)
        for g in (0, 1):
            assert report.row(g, settings.independent_category).mape < 0.15

    def test_ffn_post_rnn_no_better(self, desk):
        config, ds, splits, _, model = desk
        variant = init_model(
            config.model.variant(n_items=ds.n_items, ffn_post_rnn=True),
            ds.n_users,
            make_rng(config.seed, Stream.INIT),
        )
        fit(variant, splits, config.train, config.eval, progress=False)
        default, ffn = (
            evaluate_model(ParsRecScorer(m), splits, Split.TEST, ds.n_items, config.eval, False)
            for m in (model, variant)
        )
        assert ffn.ndcg[10] <= default.ndcg[10] + 0.005
