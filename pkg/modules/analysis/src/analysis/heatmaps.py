"""Category-level attention heatmaps, group means and structure scores."""

from __future__ import annotations

import logging

import numpy as np

from .data_models import AttentionAtlas, CategoryHeatmap, GroupHeatmaps
from .errors import EmptyGroupError

logger = logging.getLogger(__name__)


def normalize_rows(matrix: np.ndarray) -> np.ndarray:
    """Scale each row to sum 1; all-zero rows stay zero."""
    sums = matrix.sum(axis=1, keepdims=True)
    out = np.zeros_like(matrix, dtype=np.float64)
    np.divide(matrix, sums, out=out, where=sums > 0)
    return out


def display_filter(matrix: np.ndarray, threshold: float = 0.05) -> np.ndarray:
    """Zero entries whose magnitude is below ``threshold``."""
    return np.where(np.abs(matrix) < threshold, 0.0, matrix)


def category_rows(atlas: AttentionAtlas, user: int) -> np.ndarray:
    """Rows of A_u summed within each target category, (C, n_items)."""
    targets, keys, weights = atlas.coordinates(user)
    out = np.zeros((atlas.n_categories, atlas.n_items))
    np.add.at(out, (atlas.item_category[targets], keys), weights)
    return out


def average_columns(rows: np.ndarray, item_category: np.ndarray) -> np.ndarray:
    """Mean over the item columns of each key category, (C, C)."""
    n_categories = int(item_category.max()) + 1
    sums = np.zeros((rows.shape[0], n_categories))
    np.add.at(sums.T, item_category, rows.T)
    counts = np.bincount(item_category, minlength=n_categories)
    return sums / np.maximum(counts, 1)[None, :]


def aggregate_to_categories(atlas: AttentionAtlas, user: int) -> CategoryHeatmap:
    """Row-sum within target categories, column-average within key categories, row-normalize."""
    stage2 = average_columns(category_rows(atlas, user), atlas.item_category)
    return CategoryHeatmap(matrix=normalize_rows(stage2), label=f"user {user}")


def group_heatmaps(
    atlas: AttentionAtlas, user_group: np.ndarray, groups: list[int] | None = None
) -> GroupHeatmaps:
    """Mean per-user heatmap of each group and every pairwise difference."""
    user_group = np.asarray(user_group)
    if groups is None:
        groups = sorted({int(user_group[u]) for u in atlas.users})
    members: dict[int, list[int]] = {g: [] for g in groups}
    for user in atlas.users:
        g = int(user_group[user])
        if g in members:
            members[g].append(user)

    means: dict[int, CategoryHeatmap] = {}
    for g, users in members.items():
        if not users:
            raise EmptyGroupError(f"group {g} has no user with collected attention")
        stacked = np.stack([aggregate_to_categories(atlas, u).matrix for u in users])
        means[g] = CategoryHeatmap(matrix=stacked.mean(axis=0), label=f"group {g}")
        logger.debug("Group %d heatmap from %d users", g, len(users))

    differences = {
        (a, b): CategoryHeatmap(
            matrix=means[a].matrix - means[b].matrix, label=f"group {a} - group {b}"
        )
        for i, a in enumerate(groups)
        for b in groups[i + 1 :]
    }
    return GroupHeatmaps(
        groups=means,
        differences=differences,
        users_per_group={g: len(u) for g, u in members.items()},
    )


def block_labels(sigmas: np.ndarray) -> np.ndarray:
    """Label each category with its covariance block, (C,).

    Two categories share a block when a chain of nonzero correlations links
    them in any of the given (groups, C, C) covariances. Labels are the
    smallest member of the block.
    """
    sigmas = np.asarray(sigmas)
    if sigmas.ndim == 2:
        sigmas = sigmas[None]
    n = sigmas.shape[-1]
    linked = np.any(sigmas != 0, axis=0) | np.eye(n, dtype=bool)
    labels = np.arange(n)
    while True:
        spread = np.where(linked, labels[None, :], n).min(axis=1)
        if np.array_equal(spread, labels):
            return labels
        labels = spread


def structure_scores(
    heatmap: np.ndarray, sigma: np.ndarray, blocks: np.ndarray | None = None
) -> dict[str, float]:
    """Mean off-diagonal heatmap mass over positively, negatively and un-correlated pairs.

    The independent pairs are those in different blocks; ``blocks`` defaults
    to ``block_labels(sigma)``.
    """
    off = ~np.eye(sigma.shape[0], dtype=bool)
    blocks = block_labels(sigma) if blocks is None else np.asarray(blocks)
    out = {}
    for name, mask in (
        ("positive", (sigma > 0) & off),
        ("negative", (sigma < 0) & off),
        ("independent", blocks[:, None] != blocks[None, :]),
    ):
        out[name] = float(heatmap[mask].mean()) if mask.any() else float("nan")
    return out


def sign_agreement(
    difference: np.ndarray, sigma_a: np.ndarray, sigma_b: np.ndarray
) -> tuple[float, int]:
    """Agreement of the heatmap difference with sign(sigma_a - sigma_b).

    Only off-diagonal entries where the two groups' correlations differ in
    sign count. Returns (share that agrees, number of such entries).
    """
    off = ~np.eye(sigma_a.shape[0], dtype=bool)
    mask = (np.sign(sigma_a) != np.sign(sigma_b)) & off
    if not mask.any():
        return float("nan"), 0
    agree = np.sign(difference[mask]) == np.sign((sigma_a - sigma_b)[mask])
    return float(agree.mean()), int(mask.sum())


def category_similarity(similarity: np.ndarray, item_category: np.ndarray) -> np.ndarray:
    """Mean item-item similarity within each category pair, (C, C)."""
    item_category = np.asarray(item_category)
    per_row = average_columns(similarity, item_category)
    return average_columns(per_row.T, item_category).T
