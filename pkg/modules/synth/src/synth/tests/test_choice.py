"""Tests for basket sizes, prices, user profiles and the probit choices."""

import numpy as np
import pytest

from synth import (
    InvalidConfigError,
    PriceTable,
    SynthConfig,
    UserProfile,
    choose_categories,
    choose_product,
    draw_prices,
    draw_user_profiles,
    sample_basket_size,
    top_categories,
)


def _truncated_ceil_weibull_mean(shape=0.8, scale=1.47, low=2, high=10) -> float:
    def cdf(x):
        return 1.0 - np.exp(-((x / scale) ** shape))

    n = np.arange(low, high + 1)
    pmf = cdf(n) - cdf(n - 1)
    return float((n * pmf).sum() / pmf.sum())


def _profile(omega) -> UserProfile:
    return UserProfile(user=0, group=0, omega=np.array(omega, dtype=float))


class TestSampleBasketSize:
    def test_values_within_bounds(self):
        rng = np.random.default_rng(0)
        sizes = {sample_basket_size(rng) for _ in range(5_000)}
        assert sizes <= set(range(2, 11))
        assert 2 in sizes

    def test_mean_matches_truncated_distribution(self):
        rng = np.random.default_rng(1)
        sizes = np.array([sample_basket_size(rng) for _ in range(20_000)])
        expected = _truncated_ceil_weibull_mean()
        assert abs(sizes.mean() - expected) / expected < 0.02

    def test_custom_bounds(self):
        rng = np.random.default_rng(2)
        assert {sample_basket_size(rng, bounds=(3, 3)) for _ in range(50)} == {3}


class TestDrawPrices:
    def test_shapes_and_ranges(self):
        config = SynthConfig(n_categories=5, products_per_category=40)
        prices = draw_prices(config, np.random.default_rng(0))
        assert prices.base.shape == (5,)
        assert prices.product.shape == (5, 40)
        assert (prices.base > 0).all()
        ratio = prices.product / prices.base[:, None]
        assert ratio.min() >= 0.5
        assert ratio.max() <= 2.0

    def test_base_price_mean(self):
        config = SynthConfig(n_categories=10_000, products_per_category=1)
        prices = draw_prices(config, np.random.default_rng(1))
        expected = np.exp(0.5 + 0.1**2 / 2)
        assert abs(prices.base.mean() - expected) / expected < 0.01


class TestDrawUserProfiles:
    def _config(self, **kwargs) -> SynthConfig:
        return SynthConfig(
            n_users=1000, n_groups=2, n_categories=2, products_per_category=3, **kwargs
        )

    def _identity_factors(self) -> np.ndarray:
        return np.stack([np.eye(3), np.eye(3)])

    def test_omega_variance_is_tau_squared(self):
        profiles = draw_user_profiles(self._config(), self._identity_factors())
        omega = np.stack([p.omega for p in profiles])
        assert abs(omega.var() - 4.0) / 4.0 < 0.1

    def test_round_robin_groups(self):
        profiles = draw_user_profiles(self._config(), self._identity_factors())
        assert [p.group for p in profiles[:4]] == [0, 1, 0, 1]
        assert [p.user for p in profiles[:3]] == [0, 1, 2]

    def test_users_differ(self):
        profiles = draw_user_profiles(self._config(), self._identity_factors())
        assert not np.array_equal(profiles[0].omega, profiles[1].omega)

    def test_tiny_tau_gives_near_zero(self):
        profiles = draw_user_profiles(self._config(tau=1e-9), self._identity_factors())
        assert np.abs(profiles[0].omega).max() < 1e-7

    def test_same_seed_same_profiles(self):
        a = draw_user_profiles(self._config(seed=3), self._identity_factors())
        b = draw_user_profiles(self._config(seed=3), self._identity_factors())
        np.testing.assert_array_equal(a[10].omega, b[10].omega)


class TestTopCategories:
    def test_hand_argsort(self):
        np.testing.assert_array_equal(top_categories(np.array([-0.2, -0.6, 0.2]), 2), [2, 0])

    def test_all_categories(self):
        assert sorted(top_categories(np.array([0.3, 0.1, 0.2]), 3)) == [0, 1, 2]

    def test_ties_prefer_lower_index(self):
        np.testing.assert_array_equal(top_categories(np.array([0.5, 1.0, 1.0, 1.0]), 2), [1, 2])

    def test_too_many_rejected(self):
        with pytest.raises(InvalidConfigError):
            top_categories(np.zeros(3), 4)

    def test_choose_categories_distinct(self):
        rng = np.random.default_rng(0)
        cats = choose_categories(-0.5, np.eye(20), 7, rng)
        assert len(set(cats.tolist())) == 7

    def test_choose_categories_follows_alpha(self):
        rng = np.random.default_rng(0)
        alpha = np.array([0.0, 100.0, 0.0, 50.0])
        np.testing.assert_array_equal(choose_categories(alpha, np.eye(4), 2, rng), [1, 3])


class TestChooseProduct:
    def test_hand_arithmetic(self):
        prices = PriceTable(base=np.array([1.5]), product=np.array([[1.0, 2.0]]))
        item = choose_product(
            _profile([[0.5, -0.2]]), 0, prices, np.random.default_rng(0), beta=0.1, sigma=0.0
        )
        assert item == 0

    def test_item_id_offset_by_category(self):
        prices = PriceTable(base=np.ones(2), product=np.ones((2, 3)))
        item = choose_product(
            _profile([[0, 0, 0], [0, 5, 0]]), 1, prices, np.random.default_rng(0), sigma=0.0
        )
        assert item == 4

    def test_single_product_category(self):
        prices = PriceTable(base=np.ones(1), product=np.ones((1, 1)))
        rng = np.random.default_rng(0)
        assert {choose_product(_profile([[0.0]]), 0, prices, rng) for _ in range(20)} == {0}

    def test_degenerate_probit_picks_argmax_omega(self):
        prices = PriceTable(base=np.ones(1), product=np.array([[1.0, 9.0, 3.0]]))
        item = choose_product(
            _profile([[0.1, 0.9, 0.4]]), 0, prices, np.random.default_rng(0), beta=0.0, sigma=1e-9
        )
        assert item == 1

    def test_tie_goes_to_lower_index(self):
        prices = PriceTable(base=np.ones(1), product=np.ones((1, 3)))
        item = choose_product(
            _profile([[0.0, 1.0, 1.0]]), 0, prices, np.random.default_rng(0), sigma=0.0
        )
        assert item == 1
