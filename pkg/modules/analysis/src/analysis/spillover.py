"""Category-removal spillover: predicted unit sales with a category taken off the shelf."""

from __future__ import annotations

import csv
import logging
import math
from functools import partial
from pathlib import Path

import numpy as np
from evaluation import EvalCase, ParsRecScorer, Split, SplitSpec
from numerics import Stream, make_rng
from parsrec import ParsRecModel, teacher_force_next
from tqdm import tqdm

from .data_models import SpilloverReport, SpilloverRow
from .errors import AnalysisConfigError

logger = logging.getLogger(__name__)

SPILLOVER_HEADER = [
    "group",
    "category",
    "predicted",
    "actual",
    "mape",
    "removed_per_session",
    "baseline_per_session",
]


def _top_k(scores: np.ndarray, allowed: np.ndarray, k: int) -> np.ndarray:
    """Ids of the k best allowed items, best first, ties to the lower id."""
    ids = np.flatnonzero(allowed)
    order = np.lexsort((ids, -scores[ids]))
    return ids[order[:k]]


def predicted_category_mass(
    scorer: ParsRecScorer,
    case: EvalCase,
    allowed: np.ndarray,
    item_category: np.ndarray,
    n_categories: int,
    top_k: int,
    seed: int,
) -> np.ndarray:
    """Summed top-k category shares over every step of one basket, (C,)."""
    mass = np.zeros(n_categories)
    cursor = scorer.open_session(case.user, case.history)
    remaining = set(case.basket)
    rng = make_rng(seed, Stream.FEEDING, case.user, case.t)
    while remaining:
        top = _top_k(cursor.scores(), allowed, top_k)
        mass += np.bincount(item_category[top], minlength=n_categories) / top_k
        fed = teacher_force_next(int(top[0]), remaining, rng)
        remaining.discard(fed)
        cursor.feed(fed)
    return mass


def _group_mass(
    model: ParsRecModel,
    cases: list[EvalCase],
    allowed: np.ndarray,
    item_category: np.ndarray,
    user_group: np.ndarray,
    n_categories: int,
    top_k: int,
    seed: int,
    desc: str,
    progress: bool,
) -> tuple[dict[int, np.ndarray], dict[int, int]]:
    scorer = ParsRecScorer(model)
    mass: dict[int, np.ndarray] = {}
    sessions: dict[int, int] = {}
    for case in tqdm(cases, desc=desc, unit="session", disable=not progress, leave=False):
        g = int(user_group[case.user])
        m = predicted_category_mass(
            scorer, case, allowed, item_category, n_categories, top_k, seed
        )
        mass[g] = mass.get(g, np.zeros(n_categories)) + m
        sessions[g] = sessions.get(g, 0) + 1
    return mass, sessions


def spillover_experiment(
    model: ParsRecModel,
    splits: SplitSpec,
    item_category: np.ndarray,
    user_group: np.ndarray,
    removed_category: int = 0,
    top_k: int = 10,
    seed: int = 0,
    progress: bool = True,
) -> SpilloverReport:
    """Predict per-group category sales on test baskets with ``removed_category`` off the shelf.

    Test baskets containing a removed item are dropped; the ranking covers
    every remaining item (no candidate sampling). A baseline pass over all
    test baskets with the full assortment gives the no-removal sales rate.
    """
    item_category = np.asarray(item_category)
    user_group = np.asarray(user_group)
    n_categories = int(item_category.max()) + 1
    if not 0 <= removed_category < n_categories:
        raise AnalysisConfigError(
            f"removed_category={removed_category} is outside the {n_categories} categories"
        )
    if not 1 <= top_k < model.config.n_items:
        raise AnalysisConfigError(f"top_k must be in [1, {model.config.n_items}), got {top_k}")

    removed = item_category == removed_category
    allowed = ~removed
    cases = splits.cases(Split.TEST)
    kept = [c for c in cases if not removed[np.asarray(c.basket)].any()]
    logger.info(
        "Spillover: category %d removed, %d of %d test baskets kept",
        removed_category,
        len(kept),
        len(cases),
    )

    group_mass = partial(
        _group_mass,
        model,
        item_category=item_category,
        user_group=user_group,
        n_categories=n_categories,
        top_k=top_k,
        seed=seed,
        progress=progress,
    )
    mass, sessions = group_mass(kept, allowed, desc="Spillover")
    base_mass, base_sessions = group_mass(cases, np.ones_like(allowed), desc="Spillover baseline")

    actual: dict[int, np.ndarray] = {}
    for case in kept:
        g = int(user_group[case.user])
        counts = np.bincount(item_category[np.asarray(case.basket)], minlength=n_categories)
        actual[g] = actual.get(g, np.zeros(n_categories, dtype=np.int64)) + counts

    rows = []
    for g in sorted(mass):
        for c in range(n_categories):
            predicted = float(mass[g][c])
            count = int(actual[g][c])
            if count == 0:
                mape = math.nan
                if c != removed_category:
                    logger.warning("Group %d category %d has no actual sales; MAPE undefined", g, c)
            else:
                mape = abs(predicted - count) / count
            baseline = (
                float(base_mass[g][c]) / base_sessions[g] if g in base_sessions else math.nan
            )
            rows.append(
                SpilloverRow(
                    group=g,
                    category=c,
                    predicted=predicted,
                    actual=count,
                    mape=mape,
                    removed_per_session=predicted / sessions[g],
                    baseline_per_session=baseline,
                )
            )
    return SpilloverReport(
        removed_category=removed_category,
        top_k=top_k,
        rows=rows,
        sessions=sessions,
        baseline_sessions=base_sessions,
    )


def write_spillover_csv(report: SpilloverReport, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SPILLOVER_HEADER)
        for r in report.rows:
            writer.writerow(
                [
                    r.group,
                    r.category,
                    f"{r.predicted:.6f}",
                    r.actual,
                    "" if math.isnan(r.mape) else f"{r.mape:.6f}",
                    f"{r.removed_per_session:.6f}",
                    f"{r.baseline_per_session:.6f}",
                ]
            )
    logger.info("Wrote %d spillover rows to %s", len(report.rows), path)
