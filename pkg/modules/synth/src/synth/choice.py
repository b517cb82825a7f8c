"""Consumer choice: basket sizes, prices, user tastes, categories and products."""

from __future__ import annotations

import math

import numpy as np
from numerics import Stream, make_rng

from .covariance import sample_mvn
from .data_models import PriceTable, SynthConfig, UserProfile
from .errors import InvalidConfigError


def sample_basket_size(
    rng: np.random.Generator,
    shape: float = 0.80,
    scale: float = 1.47,
    bounds: tuple[int, int] = (2, 10),
) -> int:
    """ceil(Weibull(shape, scale)), redrawn until it falls inside ``bounds``."""
    low, high = bounds
    while True:
        n = math.ceil(scale * rng.weibull(shape))
        if low <= n <= high:
            return n


def draw_prices(config: SynthConfig, rng: np.random.Generator) -> PriceTable:
    """Lognormal category base prices, then per-product Uniform(base/2, 2*base)."""
    base = rng.lognormal(config.price_mu, config.price_sigma, size=config.n_categories)
    product = rng.uniform(
        low=(base / 2)[:, None],
        high=(2 * base)[:, None],
        size=(config.n_categories, config.products_per_category),
    )
    return PriceTable(base=base, product=product)


def draw_user_profile(
    config: SynthConfig, user: int, omega_factors: np.ndarray, rng: np.random.Generator
) -> UserProfile:
    """Draw one user's product base utilities, omega[c] ~ N(0, tau^2 Omega0[c]).

    ``omega_factors`` stacks one factor of each category's within-category
    correlation matrix, shape (C, P, P).
    """
    z = rng.standard_normal((config.n_categories, config.products_per_category))
    omega = config.tau * np.einsum("cij,cj->ci", omega_factors, z)
    return UserProfile(user=user, group=user % config.n_groups, omega=omega)


def draw_user_profiles(config: SynthConfig, omega_factors: np.ndarray) -> list[UserProfile]:
    """Profiles of every user, each drawn first from that user's own stream."""
    return [
        draw_user_profile(config, u, omega_factors, make_rng(config.seed, Stream.DATA, u))
        for u in range(config.n_users)
    ]


def top_categories(propensity: np.ndarray, n: int) -> np.ndarray:
    """Indices of the ``n`` largest propensities, largest first, ties to the lower index."""
    if n > propensity.shape[0]:
        raise InvalidConfigError(
            f"cannot choose {n} categories out of {propensity.shape[0]}"
        )
    order = np.lexsort((np.arange(propensity.shape[0]), -propensity))
    return order[:n]


def choose_categories(
    alpha: np.ndarray | float,
    sigma_factor: np.ndarray,
    n: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Multinomial-probit category choice: top ``n`` of alpha + eps, eps ~ N(0, Sigma)."""
    eps = sample_mvn(sigma_factor, rng)
    return top_categories(alpha + eps, n)


def choose_product(
    profile: UserProfile,
    category: int,
    prices: PriceTable,
    rng: np.random.Generator,
    beta: float = 0.1,
    sigma: float = 1.0,
) -> int:
    """Item id of the utility-maximizing product in ``category``.

    Utility is omega - beta * price + gamma with fresh gamma ~ N(0, sigma^2);
    an exact tie goes to the lower product index.
    """
    omega = profile.omega[category]
    utility = omega - beta * prices.product[category] + sigma * rng.standard_normal(omega.shape[0])
    return category * omega.shape[0] + int(np.argmax(utility))
