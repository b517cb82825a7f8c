"""End-to-end dataset synthesis."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np
from numerics import Stream, make_rng
from tqdm import tqdm

from .choice import (
    choose_categories,
    choose_product,
    draw_prices,
    draw_user_profile,
    sample_basket_size,
)
from .covariance import build_group_sigma, cholesky, load_plan, psd_factor, vine_correlation
from .data_models import CovarianceBlockPlan, Dataset, PriceTable, Session, SynthConfig
from .errors import InvalidPlanError

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class Market:
    """Everything shared by all users: prices, taste correlations and group Sigmas."""

    prices: PriceTable
    omega_factors: np.ndarray  # (C, P, P)
    group_sigma: np.ndarray  # (G, C, C)
    sigma_factors: np.ndarray  # (G, C, C), lower Cholesky factors


def draw_market(config: SynthConfig, plan: CovarianceBlockPlan) -> Market:
    if len(plan.groups) == 1 and not plan.groups[0]:
        plan = CovarianceBlockPlan(groups=[[] for _ in range(config.n_groups)])
    if len(plan.groups) < config.n_groups:
        raise InvalidPlanError(
            f"plan defines {len(plan.groups)} group(s) but n_groups={config.n_groups}"
        )
    group_sigma = np.stack(
        [build_group_sigma(plan, g, config.n_categories) for g in range(config.n_groups)]
    )
    sigma_factors = np.stack([cholesky(s) for s in group_sigma])

    prices = draw_prices(config, make_rng(config.seed, Stream.GLOBAL, 0))
    vine_rng = make_rng(config.seed, Stream.GLOBAL, 1)
    omega_factors = np.stack(
        [
            psd_factor(
                vine_correlation(
                    config.products_per_category, vine_rng, config.vine_beta_a, config.vine_beta_b
                )
            )
            for _ in range(config.n_categories)
        ]
    )
    return Market(
        prices=prices,
        omega_factors=omega_factors,
        group_sigma=group_sigma,
        sigma_factors=sigma_factors,
    )


def _user_sessions(config: SynthConfig, market: Market, user: int) -> list[Session]:
    rng = make_rng(config.seed, Stream.DATA, user)
    profile = draw_user_profile(config, user, market.omega_factors, rng)
    alpha = np.full(config.n_categories, config.alpha)
    factor = market.sigma_factors[profile.group]
    sessions = []
    for t in range(1, config.sessions_per_user + 1):
        n = sample_basket_size(
            rng, config.weibull_shape, config.weibull_scale, config.basket_bounds
        )
        categories = choose_categories(alpha, factor, n, rng)
        items = tuple(
            choose_product(profile, int(c), market.prices, rng, config.beta, config.sigma)
            for c in categories
        )
        sessions.append(Session(user=user, t=t, items=items))
    return sessions


def synthesize(
    config: SynthConfig,
    plan: CovarianceBlockPlan | None = None,
    progress: bool = True,
) -> Dataset:
    """Generate the full dataset. Deterministic in (config, plan).

    Each user draws from its own stream, so users can be generated in any
    order and give the same baskets.
    """
    config.validate()
    if plan is None:
        plan = load_plan(config.plan_path)
    market = draw_market(config, plan)

    sessions: list[Session] = []
    for user in tqdm(
        range(config.n_users), desc="Synthesizing users", unit="user", disable=not progress
    ):
        sessions.extend(_user_sessions(config, market, user))

    dataset = Dataset(
        sessions=sessions,
        item_category=np.arange(config.n_items) // config.products_per_category,
        user_group=np.arange(config.n_users) % config.n_groups,
        group_sigma=market.group_sigma,
        prices=market.prices,
        config=asdict(config),
    )
    logger.info(
        "Synthesized %d sessions (%d actions) for %d users over %d items",
        len(sessions),
        sum(len(s.items) for s in sessions),
        config.n_users,
        config.n_items,
    )
    return dataset
