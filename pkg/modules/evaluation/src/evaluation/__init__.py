"""Evaluation: leave-last-session splits and sampled-candidate ranking metrics.

Each held-out basket is predicted one item at a time. At every step the
remaining basket items are ranked among ``num_candidates`` sampled items;
the best rank of any remaining item feeds HR@k, NDCG@k and Sess-Prec@k.

Example:
    from evaluation import EvalConfig, PopRec, Split, evaluate_model, make_splits, poprec_fit

    splits = make_splits(dataset)
    pop = PopRec(poprec_fit(splits.train_sessions(), dataset.n_items))
    report = evaluate_model(pop, splits, Split.TEST, dataset.n_items, EvalConfig(seed=7))
    print(report.hr[10])
"""

from .candidates import CandidateSampler, sample_candidates
from .data_models import (
    CandidateSet,
    EvalCase,
    EvalConfig,
    MetricsReport,
    PopModel,
    SessionResult,
    Split,
    SplitSpec,
    UserSplit,
)
from .errors import EmptyEvaluationError, EvalConfigError, EvaluationError
from .metrics import (
    aggregate_metrics,
    best_rank,
    evaluate_model,
    evaluate_session,
    rank_candidates,
)
from .report import CSV_HEADER, format_metrics_table, write_metrics_csv
from .scorers import (
    ParsRecScorer,
    PopRec,
    RandomScorer,
    Scorer,
    SessionCursor,
    poprec_fit,
    poprec_rank,
)
from .splits import make_splits

__all__ = [
    # Data models
    "EvalConfig",
    "Split",
    "UserSplit",
    "SplitSpec",
    "EvalCase",
    "CandidateSet",
    "SessionResult",
    "PopModel",
    "MetricsReport",
    # Splits and candidates
    "make_splits",
    "sample_candidates",
    "CandidateSampler",
    # Scorers
    "Scorer",
    "SessionCursor",
    "ParsRecScorer",
    "PopRec",
    "RandomScorer",
    "poprec_fit",
    "poprec_rank",
    # Metrics
    "rank_candidates",
    "best_rank",
    "evaluate_session",
    "aggregate_metrics",
    "evaluate_model",
    # Reports
    "CSV_HEADER",
    "write_metrics_csv",
    "format_metrics_table",
    # Errors
    "EvaluationError",
    "EvalConfigError",
    "EmptyEvaluationError",
]
