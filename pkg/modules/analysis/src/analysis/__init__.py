"""Analysis: what a trained model attends to, and what it predicts when a category vanishes.

Example:
    from analysis import collect_attention, export_heatmap, group_heatmaps

    atlas = collect_attention(model, training_sessions(splits), dataset.item_category)
    heatmaps = group_heatmaps(atlas, dataset.user_group)
    export_heatmap(heatmaps.groups[0].matrix, category_labels(20), "runs/desk/group0")
"""

from .attention import TrainingObserver, collect_attention, observe_unroll
from .data_models import (
    AnalysisConfig,
    AttentionAtlas,
    CategoryHeatmap,
    GroupHeatmaps,
    SpilloverReport,
    SpilloverRow,
)
from .embeddings import embedding_similarity
from .errors import AnalysisConfigError, AnalysisError, EmptyGroupError
from .export import category_labels, export_heatmap, render_image, write_heatmap_csv
from .heatmaps import (
    aggregate_to_categories,
    average_columns,
    block_labels,
    category_rows,
    category_similarity,
    display_filter,
    group_heatmaps,
    normalize_rows,
    sign_agreement,
    structure_scores,
)
from .spillover import (
    SPILLOVER_HEADER,
    predicted_category_mass,
    spillover_experiment,
    write_spillover_csv,
)

__all__ = [
    # Models
    "AnalysisConfig",
    "AttentionAtlas",
    "CategoryHeatmap",
    "GroupHeatmaps",
    "SpilloverReport",
    "SpilloverRow",
    # Attention
    "observe_unroll",
    "collect_attention",
    "TrainingObserver",
    # Heatmaps
    "normalize_rows",
    "display_filter",
    "category_rows",
    "average_columns",
    "aggregate_to_categories",
    "group_heatmaps",
    "block_labels",
    "structure_scores",
    "sign_agreement",
    "category_similarity",
    "embedding_similarity",
    # Spillover
    "spillover_experiment",
    "predicted_category_mass",
    "write_spillover_csv",
    "SPILLOVER_HEADER",
    # Export
    "export_heatmap",
    "render_image",
    "write_heatmap_csv",
    "category_labels",
    # Errors
    "AnalysisError",
    "AnalysisConfigError",
    "EmptyGroupError",
]
