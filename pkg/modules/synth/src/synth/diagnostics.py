"""Dataset validation, summary statistics and category co-occurrence lift."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .data_models import CovarianceBlockPlan, Dataset, DatasetStats


def validate_dataset(
    ds: Dataset, basket_bounds: tuple[int, int] = (2, 10), max_problems: int = 20
) -> list[str]:
    """Describe every violated dataset invariant; an empty list means valid.

    At most ``max_problems`` session-level messages are listed, followed by
    a count of the rest.
    """
    problems: list[str] = []
    if ds.group_sigma.ndim != 3 or ds.group_sigma.shape[1] != ds.group_sigma.shape[2]:
        problems.append(f"group_sigma must be (groups, C, C), got {ds.group_sigma.shape}")
    else:
        for g, sigma in enumerate(ds.group_sigma):
            if not np.allclose(sigma, sigma.T):
                problems.append(f"group {g}: Sigma is not symmetric")
    if ds.n_items and (ds.item_category.min() < 0 or ds.item_category.max() >= ds.n_categories):
        problems.append("item_category refers to a category outside Sigma")
    if ds.n_users and (ds.user_group.min() < 0 or ds.user_group.max() >= ds.n_groups):
        problems.append("user_group refers to a group without a Sigma")

    low, high = basket_bounds
    session_problems: list[str] = []
    previous: tuple[int, int] | None = None
    for s in ds.sessions:
        where = f"user {s.user} t={s.t}"
        key = (s.user, s.t)
        if previous is not None and key <= previous:
            if s.user == previous[0]:
                session_problems.append(f"{where}: timestamp does not increase")
            else:
                session_problems.append(f"{where}: sessions not sorted by user")
        previous = key
        if not 0 <= s.user < ds.n_users:
            session_problems.append(f"{where}: unknown user")
        if not low <= len(s.items) <= high:
            session_problems.append(f"{where}: basket size {len(s.items)} outside [{low}, {high}]")
        items = np.asarray(s.items, dtype=np.int64)
        if items.size and (items.min() < 0 or items.max() >= ds.n_items):
            session_problems.append(f"{where}: item id out of range")
            continue
        categories = ds.item_category[items]
        if np.unique(categories).size != categories.size:
            session_problems.append(f"{where}: more than one item from a category")

    problems.extend(session_problems[:max_problems])
    if len(session_problems) > max_problems:
        problems.append(f"... and {len(session_problems) - max_problems} more session problems")
    return problems


def dataset_stats(ds: Dataset) -> DatasetStats:
    users = len({s.user for s in ds.sessions})
    actions = sum(len(s.items) for s in ds.sessions)
    return DatasetStats(
        users=users,
        items=ds.n_items,
        sessions=len(ds.sessions),
        actions=actions,
        avg_actions_per_user=actions / users if users else 0.0,
        avg_basket_size=actions / len(ds.sessions) if ds.sessions else 0.0,
        density=actions / (users * ds.n_items) if users and ds.n_items else 0.0,
    )


def category_incidence(ds: Dataset, group: int | None = None) -> np.ndarray:
    """Boolean (baskets, C) matrix: does basket b hold an item of category c."""
    sessions = [
        s for s in ds.sessions if group is None or ds.user_group[s.user] == group
    ]
    incidence = np.zeros((len(sessions), ds.n_categories), dtype=bool)
    for b, s in enumerate(sessions):
        incidence[b, ds.item_category[list(s.items)]] = True
    return incidence


def lift_matrix(incidence: np.ndarray) -> np.ndarray:
    """Observed co-occurrence rate over the rate expected under independence.

    Entry (a, b) is P(a and b) / (P(a) P(b)); NaN where a category never occurs.
    """
    n = incidence.shape[0]
    x = incidence.astype(np.float64)
    if n == 0:
        return np.full((incidence.shape[1],) * 2, np.nan)
    joint = (x.T @ x) / n
    marginal = x.mean(axis=0)
    expected = np.outer(marginal, marginal)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(expected > 0, joint / expected, np.nan)


def cooccurrence_lift(ds: Dataset, a: int, b: int, group: int | None = None) -> float:
    return float(lift_matrix(category_incidence(ds, group))[a, b])


def write_lift_csv(ds: Dataset, plan: CovarianceBlockPlan, path: str | Path) -> int:
    """Write ``group,cat_a,cat_b,sigma,lift`` for every nonzero plan pair; returns row count."""
    rows = 0
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["group", "cat_a", "cat_b", "sigma", "lift"])
        for g in range(min(ds.n_groups, len(plan.groups))):
            lift = lift_matrix(category_incidence(ds, g))
            for a, b, corr in plan.nonzero_pairs(g):
                writer.writerow([g, a, b, f"{corr:.6g}", f"{lift[a, b]:.6f}"])
                rows += 1
    return rows
