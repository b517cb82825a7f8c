"""Data models for the synthetic market-basket generator."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import InvalidConfigError

# --- Configuration ---


@dataclass
class SynthConfig:
    """Parameters of the simulated market. Defaults are the desk-scale setup."""

    n_users: int = 1024
    n_groups: int = 2
    sessions_per_user: int = 80
    n_categories: int = 20
    products_per_category: int = 100
    alpha: float = -0.5  # category base utility
    beta: float = 0.1  # price sensitivity
    sigma: float = 1.0  # product utility noise std
    tau: float = 2.0  # product base-utility std
    weibull_shape: float = 0.80
    weibull_scale: float = 1.47
    price_mu: float = 0.5  # underlying normal of the lognormal base price
    price_sigma: float = 0.1
    min_basket: int = 2
    max_basket: int = 10
    vine_beta_a: float = 0.2
    vine_beta_b: float = 1.0
    plan_path: str | None = None  # None: the packaged default plan
    seed: int = 0

    @property
    def n_items(self) -> int:
        return self.n_categories * self.products_per_category

    @property
    def basket_bounds(self) -> tuple[int, int]:
        """Accepted basket sizes; a basket never holds more items than categories."""
        return self.min_basket, min(self.max_basket, self.n_categories)

    def validate(self) -> None:
        if self.n_users < 0 or self.sessions_per_user < 0:
            raise InvalidConfigError("n_users and sessions_per_user must be >= 0")
        if self.n_groups < 1:
            raise InvalidConfigError(f"n_groups must be >= 1, got {self.n_groups}")
        if self.n_users % self.n_groups:
            raise InvalidConfigError(
                f"n_groups ({self.n_groups}) must divide n_users ({self.n_users})"
            )
        if self.n_categories < 1 or self.products_per_category < 1:
            raise InvalidConfigError("n_categories and products_per_category must be >= 1")
        for name in ("sigma", "tau", "weibull_shape", "weibull_scale", "price_sigma"):
            if getattr(self, name) <= 0:
                raise InvalidConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.vine_beta_a <= 0 or self.vine_beta_b <= 0:
            raise InvalidConfigError("vine Beta parameters must be > 0")
        if not 1 <= self.min_basket <= self.max_basket:
            raise InvalidConfigError(
                f"basket bounds must satisfy 1 <= min <= max, got "
                f"[{self.min_basket}, {self.max_basket}]"
            )
        if self.min_basket > self.n_categories:
            raise InvalidConfigError(
                f"min_basket ({self.min_basket}) exceeds n_categories ({self.n_categories})"
            )
        if self.seed < 0:
            raise InvalidConfigError(f"seed must be >= 0, got {self.seed}")


# --- Covariance plan ---


@dataclass
class CovarianceBlock:
    """Correlations among a set of categories; variances are 1."""

    categories: tuple[int, ...]
    corr: np.ndarray  # len(categories) x len(categories), unit diagonal


@dataclass
class CovarianceBlockPlan:
    """Block-diagonal category covariance, one list of blocks per user group."""

    groups: list[list[CovarianceBlock]] = field(default_factory=lambda: [[]])
    names: list[str] = field(default_factory=list)

    def blocks(self, group: int) -> list[CovarianceBlock]:
        return self.groups[group]

    def nonzero_pairs(self, group: int) -> list[tuple[int, int, float]]:
        """(cat_a, cat_b, corr) for every nonzero off-diagonal entry, a < b."""
        pairs = []
        for block in self.groups[group]:
            cats = block.categories
            for i in range(len(cats)):
                for j in range(i + 1, len(cats)):
                    if block.corr[i, j] != 0:
                        a, b = sorted((cats[i], cats[j]))
                        pairs.append((a, b, float(block.corr[i, j])))
        return sorted(pairs)


# --- Simulated market ---


@dataclass(eq=False)
class PriceTable:
    base: np.ndarray  # per-category base price, shape (C,)
    product: np.ndarray  # per-product price, shape (C, products_per_category)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PriceTable):
            return NotImplemented
        return np.array_equal(self.base, other.base) and np.array_equal(
            self.product, other.product
        )


@dataclass(eq=False)
class UserProfile:
    user: int
    group: int
    omega: np.ndarray  # product base utilities, shape (C, products_per_category)


# --- Dataset ---


@dataclass(frozen=True)
class Session:
    """One basket. ``items`` keeps the order the items were chosen in."""

    user: int
    t: int
    items: tuple[int, ...]


@dataclass(eq=False)
class Dataset:
    """Chronological baskets plus the ground truth they were generated from."""

    sessions: list[Session]
    item_category: np.ndarray  # item id -> category
    user_group: np.ndarray  # user id -> group
    group_sigma: np.ndarray  # (groups, C, C)
    prices: PriceTable | None = None
    config: dict[str, Any] = field(default_factory=dict)

    @property
    def n_items(self) -> int:
        return int(self.item_category.shape[0])

    @property
    def n_users(self) -> int:
        return int(self.user_group.shape[0])

    @property
    def n_categories(self) -> int:
        return int(self.group_sigma.shape[-1])

    @property
    def n_groups(self) -> int:
        return int(self.group_sigma.shape[0])

    def by_user(self) -> dict[int, list[Session]]:
        """Sessions per user in chronological order."""
        out: dict[int, list[Session]] = defaultdict(list)
        for s in self.sessions:
            out[s.user].append(s)
        for sessions in out.values():
            sessions.sort(key=lambda s: s.t)
        return dict(out)

    def items_of_category(self, category: int) -> np.ndarray:
        return np.flatnonzero(self.item_category == category)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.sessions == other.sessions
            and np.array_equal(self.item_category, other.item_category)
            and np.array_equal(self.user_group, other.user_group)
            and np.array_equal(self.group_sigma, other.group_sigma)
            and self.prices == other.prices
            and self.config == other.config
        )


@dataclass
class DatasetStats:
    users: int
    items: int
    sessions: int
    actions: int
    avg_actions_per_user: float
    avg_basket_size: float
    density: float  # actions / (users * items)
