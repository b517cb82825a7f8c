"""Synth: a controlled synthetic market-basket generator.

Users in groups with different block-diagonal category covariances pick
categories by multinomial probit and one product per category by
price-aware utility. The generated baskets keep their ground truth (user
groups, per-group Sigma, prices) so learned structure can be checked.

Example:
    from synth import SynthConfig, synthesize, validate_dataset, write_dataset

    ds = synthesize(SynthConfig(n_users=64, sessions_per_user=10, seed=7))
    assert validate_dataset(ds) == []
    write_dataset(ds, "runs/toy/dataset.jsonl")
"""

from .choice import (
    choose_categories,
    choose_product,
    draw_prices,
    draw_user_profile,
    draw_user_profiles,
    sample_basket_size,
    top_categories,
)
from .covariance import (
    build_group_sigma,
    cholesky,
    load_plan,
    parse_plan,
    psd_factor,
    sample_mvn,
    vine_correlation,
)
from .data_models import (
    CovarianceBlock,
    CovarianceBlockPlan,
    Dataset,
    DatasetStats,
    PriceTable,
    Session,
    SynthConfig,
    UserProfile,
)
from .diagnostics import (
    category_incidence,
    cooccurrence_lift,
    dataset_stats,
    lift_matrix,
    validate_dataset,
    write_lift_csv,
)
from .errors import (
    DatasetFormatError,
    InvalidConfigError,
    InvalidPlanError,
    NotPositiveDefiniteError,
    SynthError,
)
from .generator import Market, draw_market, synthesize
from .storage import FORMAT_VERSION, meta_path, read_dataset, write_dataset

__all__ = [
    # Data models
    "SynthConfig",
    "CovarianceBlock",
    "CovarianceBlockPlan",
    "UserProfile",
    "PriceTable",
    "Session",
    "Dataset",
    "DatasetStats",
    # Covariance and sampling
    "load_plan",
    "parse_plan",
    "build_group_sigma",
    "cholesky",
    "psd_factor",
    "vine_correlation",
    "sample_mvn",
    # Choice model
    "sample_basket_size",
    "draw_prices",
    "draw_user_profile",
    "draw_user_profiles",
    "top_categories",
    "choose_categories",
    "choose_product",
    # Generation and storage
    "Market",
    "draw_market",
    "synthesize",
    "FORMAT_VERSION",
    "meta_path",
    "write_dataset",
    "read_dataset",
    # Diagnostics
    "validate_dataset",
    "dataset_stats",
    "category_incidence",
    "lift_matrix",
    "cooccurrence_lift",
    "write_lift_csv",
    # Errors
    "SynthError",
    "InvalidConfigError",
    "InvalidPlanError",
    "NotPositiveDefiniteError",
    "DatasetFormatError",
]
