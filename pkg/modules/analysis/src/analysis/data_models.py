"""Data models for attention atlases, heatmaps and spillover reports."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AnalysisConfigError


@dataclass
class AnalysisConfig:
    threshold: float = 0.05  # display filter for exported images
    removed_category: int = 0
    correlated_category: int = 1  # default plan: +0.6 with C0 in group A, 0 in group B
    independent_category: int = 19  # outside every block of the default plan
    top_k: int = 10
    during_training: bool = False  # collect attention from training unrolls instead
    batch_size: int = 256
    cell_pixels: int = 16  # side of one heatmap cell in exported images

    def validate(self, n_categories: int | None = None) -> None:
        if self.threshold < 0:
            raise AnalysisConfigError(f"threshold must be >= 0, got {self.threshold}")
        if self.top_k < 1:
            raise AnalysisConfigError(f"top_k must be >= 1, got {self.top_k}")
        if self.batch_size < 1 or self.cell_pixels < 1:
            raise AnalysisConfigError("batch_size and cell_pixels must be >= 1")
        if n_categories is not None:
            for name in ("removed_category", "correlated_category", "independent_category"):
                value = getattr(self, name)
                if not 0 <= value < n_categories:
                    raise AnalysisConfigError(
                        f"{name}={value} is outside the {n_categories} categories"
                    )


@dataclass
class AttentionAtlas:
    """Per-user sums of head-averaged attention, indexed (target item, key item).

    Entries are kept as coordinate lists and summed on demand, since a dense
    item-by-item matrix per user does not fit in memory at desk scale.
    """

    n_items: int
    item_category: np.ndarray
    _targets: dict[int, list[np.ndarray]] = field(default_factory=dict, repr=False)
    _keys: dict[int, list[np.ndarray]] = field(default_factory=dict, repr=False)
    _weights: dict[int, list[np.ndarray]] = field(default_factory=dict, repr=False)
    visits: dict[int, int] = field(default_factory=dict)  # accumulated steps per user

    @property
    def users(self) -> list[int]:
        return sorted(self.visits)

    @property
    def n_categories(self) -> int:
        return int(self.item_category.max()) + 1

    def add(self, user: int, target: int, keys: np.ndarray, weights: np.ndarray) -> None:
        """Accumulate one step's weights over ``keys`` into row ``target``."""
        keys = np.asarray(keys, dtype=np.int64)
        self._targets.setdefault(user, []).append(np.full(keys.shape, target, dtype=np.int64))
        self._keys.setdefault(user, []).append(keys)
        self._weights.setdefault(user, []).append(np.asarray(weights, dtype=np.float64))
        self.visits[user] = self.visits.get(user, 0) + 1

    def coordinates(self, user: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(targets, keys, weights) of every accumulated entry of ``user``."""
        if user not in self.visits:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty, np.empty(0)
        return (
            np.concatenate(self._targets[user]),
            np.concatenate(self._keys[user]),
            np.concatenate(self._weights[user]),
        )

    def matrix(self, user: int) -> np.ndarray:
        """Dense (n_items, n_items) A_u; only for small vocabularies."""
        out = np.zeros((self.n_items, self.n_items))
        targets, keys, weights = self.coordinates(user)
        np.add.at(out, (targets, keys), weights)
        return out

    def merge(self, other: AttentionAtlas) -> None:
        """Fold ``other``'s entries into this atlas."""
        for user in other.visits:
            self._targets.setdefault(user, []).extend(other._targets[user])
            self._keys.setdefault(user, []).extend(other._keys[user])
            self._weights.setdefault(user, []).extend(other._weights[user])
            self.visits[user] = self.visits.get(user, 0) + other.visits[user]


@dataclass
class CategoryHeatmap:
    """C x C attention mass, rows = target category, columns = key category."""

    matrix: np.ndarray
    label: str = ""

    @property
    def n_categories(self) -> int:
        return int(self.matrix.shape[0])


@dataclass
class GroupHeatmaps:
    groups: dict[int, CategoryHeatmap]
    differences: dict[tuple[int, int], CategoryHeatmap]  # (a, b) -> a minus b
    users_per_group: dict[int, int]


@dataclass
class SpilloverRow:
    group: int
    category: int
    predicted: float
    actual: int
    mape: float  # NaN when actual is 0
    removed_per_session: float
    baseline_per_session: float

    @property
    def change_per_session(self) -> float:
        """Predicted sales per session with the category removed minus without."""
        return self.removed_per_session - self.baseline_per_session


@dataclass
class SpilloverReport:
    removed_category: int
    top_k: int
    rows: list[SpilloverRow]
    sessions: dict[int, int]  # group -> filtered test sessions
    baseline_sessions: dict[int, int]  # group -> all test sessions

    def row(self, group: int, category: int) -> SpilloverRow:
        for r in self.rows:
            if r.group == group and r.category == category:
                return r
        raise KeyError((group, category))
