"""Sequential within-basket ranking and HR / NDCG / Sess-Prec metrics."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
from numerics import Stream, make_rng
from parsrec import teacher_force_next
from tqdm import tqdm

from .candidates import CandidateSampler
from .data_models import EvalConfig, MetricsReport, SessionResult, Split, SplitSpec
from .errors import EmptyEvaluationError
from .scorers import Scorer

logger = logging.getLogger(__name__)


def rank_candidates(scores: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Candidate ids by descending score, ties to the lower id."""
    candidates = np.asarray(candidates, dtype=np.int64)
    return candidates[np.lexsort((candidates, -scores[candidates]))]


def best_rank(ranked: np.ndarray, remaining: set[int]) -> int:
    """1-based position of the first remaining item in ``ranked``."""
    hits = np.flatnonzero(np.isin(ranked, list(remaining)))
    return int(hits[0]) + 1


def evaluate_session(
    scorer: Scorer,
    user: int,
    history: Sequence[int],
    basket: Sequence[int],
    sampler: CandidateSampler,
    rng: np.random.Generator,
    t: int = 0,
) -> SessionResult:
    """Predict a held-out basket one item at a time.

    Each step ranks a fresh candidate set, records the best rank of any
    remaining item, then feeds the top candidate if it is still in the
    basket or a random remaining item otherwise.
    """
    remaining = set(basket)
    cursor = scorer.open_session(user, history)
    ranks = []
    for j in range(len(remaining)):
        candidates = sampler.sample(user, t, j, remaining)
        ranked = rank_candidates(cursor.scores(), candidates.items)
        ranks.append(best_rank(ranked, remaining))
        fed = teacher_force_next(int(ranked[0]), remaining, rng)
        remaining.discard(fed)
        cursor.feed(fed)
    return SessionResult(user=user, ranks=ranks)


def aggregate_metrics(
    results: Sequence[SessionResult], ks: Sequence[int] = (1, 5, 10)
) -> MetricsReport:
    """HR and NDCG averaged over steps; Sess-Prec averaged over sessions."""
    results = [r for r in results if r.n_steps]
    if not results:
        raise EmptyEvaluationError("no prediction steps to aggregate")
    ranks = np.concatenate([np.asarray(r.ranks, dtype=np.float64) for r in results])
    gains = 1.0 / np.log2(1.0 + ranks)
    hr, ndcg, sess_prec = {}, {}, {}
    for k in sorted(set(ks)):
        hit = ranks <= k
        hr[k] = float(hit.mean())
        ndcg[k] = float(np.where(hit, gains, 0.0).mean())
        sess_prec[k] = float(np.mean([np.mean(np.asarray(r.ranks) <= k) for r in results]))
    return MetricsReport(
        hr=hr, ndcg=ndcg, sess_prec=sess_prec, steps=int(ranks.size), sessions=len(results)
    )


def evaluate_model(
    scorer: Scorer,
    splits: SplitSpec,
    split: Split,
    n_items: int,
    config: EvalConfig | None = None,
    progress: bool = True,
) -> MetricsReport:
    """Run every held-out basket of ``split`` through ``scorer``.

    Candidate and feeding draws depend only on (seed, user, session), so
    scorers compared under one seed see the same candidates.
    """
    config = config or EvalConfig()
    config.validate()
    sampler = CandidateSampler(n_items, config.num_candidates, config.seed)
    cases = splits.cases(split)
    results = []
    for case in tqdm(
        cases, desc=f"Evaluating {scorer.name}", unit="session", leave=False, disable=not progress
    ):
        rng = make_rng(config.seed, Stream.FEEDING, case.user, case.t)
        results.append(
            evaluate_session(scorer, case.user, case.history, case.basket, sampler, rng, case.t)
        )
    report = aggregate_metrics(results, config.ks)
    logger.info(
        "%s on %s: %d sessions, %d steps, HR@%d=%.4f",
        scorer.name,
        split.value,
        report.sessions,
        report.steps,
        max(report.hr),
        report.hr[max(report.hr)],
    )
    return report
