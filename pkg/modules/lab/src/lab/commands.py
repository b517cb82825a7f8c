"""The six subcommands. Each takes the resolved RunConfig and the parsed CLI args."""

from __future__ import annotations

import argparse
import csv
import logging
from dataclasses import replace
from pathlib import Path

from analysis import (
    AttentionAtlas,
    TrainingObserver,
    block_labels,
    category_labels,
    category_similarity,
    collect_attention,
    embedding_similarity,
    export_heatmap,
    group_heatmaps,
    sign_agreement,
    spillover_experiment,
    structure_scores,
    write_spillover_csv,
)
from evaluation import (
    MetricsReport,
    ParsRecScorer,
    PopRec,
    RandomScorer,
    Split,
    SplitSpec,
    evaluate_model,
    format_metrics_table,
    make_splits,
    poprec_fit,
    write_metrics_csv,
)
from numerics import Stream, make_rng
from parsrec import ModelConfig, ParsRecModel, init_model
from synth import (
    Dataset,
    dataset_stats,
    load_plan,
    read_dataset,
    synthesize,
    validate_dataset,
    write_dataset,
    write_lift_csv,
)
from training import fit, load_checkpoint, save_checkpoint, training_sessions

from .data_models import RunConfig
from .errors import LabError
from .run_dir import CHECKPOINT, DATASET, require

logger = logging.getLogger(__name__)

ABLATIONS: dict[str, dict[str, object]] = {
    "default": {},
    "no_ln": {"use_ln": False},
    "no_dropout": {"use_dropout": False},
    "no_q_at_ln": {"add_q_at_ln": False},
    "layers_2": {"layers": 2},
    "heads_1": {"heads": 1},
    "heads_4": {"heads": 4},
    "ffn_pre_rnn": {"ffn_pre_rnn": True},
    "ffn_post_rnn": {"ffn_post_rnn": True},
}
ABLATION_HEADER = ["variant", "hr10", "ndcg10", "sessprec10", "delta_ndcg10"]
STRUCTURE_HEADER = [
    "group",
    "users",
    "positive",
    "negative",
    "independent",
    "focus_correlated",
    "focus_independent",
]


# --- Shared loading ---


def _dataset(config: RunConfig, args: argparse.Namespace) -> Dataset:
    path = require(args.dataset or config.out_dir / DATASET, "synth")
    return read_dataset(path)


def _splits(config: RunConfig, ds: Dataset) -> SplitSpec:
    return make_splits(ds, config.eval.min_sessions, config.eval.min_basket)


def _model_config(config: RunConfig, ds: Dataset, **changes: object) -> ModelConfig:
    return config.model.variant(n_items=ds.n_items, **changes)


def _fresh_model(config: RunConfig, ds: Dataset, **changes: object) -> ParsRecModel:
    rng = make_rng(config.seed, Stream.INIT)
    return init_model(_model_config(config, ds, **changes), ds.n_users, rng)


def _trained_model(config: RunConfig, args: argparse.Namespace, ds: Dataset) -> ParsRecModel:
    path = require(args.checkpoint or config.out_dir / CHECKPOINT, "train")
    return load_checkpoint(path, expected=_model_config(config, ds))


# --- synth ---


def run_synth(config: RunConfig, args: argparse.Namespace) -> None:
    out = config.out_dir
    plan = load_plan(config.synth.plan_path)
    ds = synthesize(config.synth, plan, progress=args.progress)
    problems = validate_dataset(ds, config.synth.basket_bounds)
    if problems:
        raise LabError(f"generated dataset is invalid: {problems[0]} ({len(problems)} problems)")
    path = Path(args.dataset) if args.dataset else out / DATASET
    write_dataset(ds, path)
    n_pairs = write_lift_csv(ds, plan, out / "lift.csv")
    logger.info("Wrote %s and %d lift rows", path, n_pairs)

    stats = dataset_stats(ds)
    print(f"{'users':<22}{stats.users:>12}")
    print(f"{'items':<22}{stats.items:>12}")
    print(f"{'sessions':<22}{stats.sessions:>12}")
    print(f"{'actions':<22}{stats.actions:>12}")
    print(f"{'avg actions / user':<22}{stats.avg_actions_per_user:>12.2f}")
    print(f"{'avg basket size':<22}{stats.avg_basket_size:>12.2f}")
    print(f"{'density':<22}{stats.density:>12.4%}")


# --- train ---


def run_train(config: RunConfig, args: argparse.Namespace) -> None:
    out = config.out_dir
    ds = _dataset(config, args)
    model = _fresh_model(config, ds)
    observer = None
    if config.analysis.during_training:
        observer = TrainingObserver(ds.n_items, ds.item_category)
    history = fit(
        model,
        _splits(config, ds),
        config.train,
        config.eval,
        progress=args.progress,
        on_unroll=observer,
        history_path=out / "history.csv",
    )
    path = Path(args.checkpoint) if args.checkpoint else out / CHECKPOINT
    save_checkpoint(
        path,
        model,
        epoch=history.best_epoch,
        best_metric=history.best_metric,
        optimizer_arrays=history.optimizer_arrays,
        optimizer_steps=history.optimizer_steps,
    )
    logger.info("Saved checkpoint %s", path)
    if observer is not None:
        _write_attention(config, ds, observer.atlas, out / "attention_training")
    print(f"epochs run      {len(history.records)}")
    print(f"best epoch      {history.best_epoch}")
    print(f"best NDCG@10    {history.best_metric:.4f}")


# --- eval ---


def run_eval(config: RunConfig, args: argparse.Namespace) -> None:
    out = config.out_dir
    ds = _dataset(config, args)
    splits = _splits(config, ds)
    scorers = []
    if args.checkpoint or (out / CHECKPOINT).exists():
        scorers.append(ParsRecScorer(_trained_model(config, args, ds)))
    else:
        logger.warning("No checkpoint in %s; evaluating baselines only", out)
    scorers.append(PopRec(poprec_fit(splits.train_sessions(), ds.n_items)))
    scorers.append(RandomScorer(ds.n_items, config.eval.seed))

    reports: dict[str, MetricsReport] = {}
    for scorer in scorers:
        report = evaluate_model(
            scorer, splits, Split.TEST, ds.n_items, config.eval, progress=args.progress
        )
        write_metrics_csv(report, out / f"metrics_{scorer.name.lower()}.csv")
        reports[scorer.name] = report
    print(format_metrics_table(reports))


# --- analyze ---


def _write_attention(
    config: RunConfig, ds: Dataset, atlas: AttentionAtlas, directory: Path
) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    settings = config.analysis
    labels = category_labels(ds.n_categories)
    heatmaps = group_heatmaps(atlas, ds.user_group)

    blocks = block_labels(ds.group_sigma)
    rows = []
    for g, heat in heatmaps.groups.items():
        export_heatmap(
            heat.matrix, labels, directory / f"group{g}", settings.threshold, settings.cell_pixels
        )
        scores = structure_scores(heat.matrix, ds.group_sigma[g], blocks)
        row = heat.matrix[settings.removed_category]
        rows.append(
            [
                g,
                heatmaps.users_per_group[g],
                *(f"{scores[k]:.6f}" for k in ("positive", "negative", "independent")),
                f"{row[settings.correlated_category]:.6f}",
                f"{row[settings.independent_category]:.6f}",
            ]
        )
    for (a, b), diff in heatmaps.differences.items():
        export_heatmap(
            diff.matrix,
            labels,
            directory / f"group{a}_minus_group{b}",
            settings.threshold,
            settings.cell_pixels,
        )
        share, n = sign_agreement(diff.matrix, ds.group_sigma[a], ds.group_sigma[b])
        print(f"group {a} - group {b}: sign agreement {share:.2%} over {n} entries")

    with open(directory / "structure.csv", "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(STRUCTURE_HEADER)
        writer.writerows(rows)
    print(f"{'group':<8}{'users':>8}{'positive':>12}{'negative':>12}{'indep.':>12}")
    for row in rows:
        print(f"{row[0]:<8}{row[1]:>8}" + "".join(f"{float(v):>12.4f}" for v in row[2:5]))


def run_analyze(config: RunConfig, args: argparse.Namespace) -> None:
    out = config.out_dir
    ds = _dataset(config, args)
    model = _trained_model(config, args, ds)
    atlas = collect_attention(
        model,
        training_sessions(_splits(config, ds)),
        ds.item_category,
        seed=config.seed,
        batch_size=config.analysis.batch_size,
        progress=args.progress,
    )
    _write_attention(config, ds, atlas, out / "heatmaps")
    similarity = category_similarity(embedding_similarity(model), ds.item_category)
    export_heatmap(
        similarity,
        category_labels(ds.n_categories),
        out / "heatmaps" / "embedding_similarity",
        config.analysis.threshold,
        config.analysis.cell_pixels,
    )


# --- spillover ---


def run_spillover(config: RunConfig, args: argparse.Namespace) -> None:
    ds = _dataset(config, args)
    model = _trained_model(config, args, ds)
    settings = config.analysis
    report = spillover_experiment(
        model,
        _splits(config, ds),
        ds.item_category,
        ds.user_group,
        removed_category=settings.removed_category,
        top_k=settings.top_k,
        seed=config.seed,
        progress=args.progress,
    )
    write_spillover_csv(report, config.out_dir / "spillover.csv")

    print(f"removed category C{report.removed_category}, top-{report.top_k}")
    print(f"{'group':<7}{'category':<10}{'predicted':>11}{'actual':>9}{'MAPE':>9}{'change':>10}")
    for g in sorted(report.sessions):
        for c in (settings.correlated_category, settings.independent_category):
            r = report.row(g, c)
            print(
                f"{g:<7}{'C' + str(c):<10}{r.predicted:>11.1f}{r.actual:>9}"
                f"{r.mape:>9.2%}{r.change_per_session:>+10.4f}"
            )


# --- ablate ---


def run_ablate(config: RunConfig, args: argparse.Namespace) -> None:
    ds = _dataset(config, args)
    splits = _splits(config, ds)
    eval_config = replace(config.eval, ks=tuple(sorted({*config.eval.ks, 10})))
    results: dict[str, MetricsReport] = {}
    for name, changes in ABLATIONS.items():
        logger.info("Ablation %s %s", name, changes)
        model = _fresh_model(config, ds, **changes)
        fit(model, splits, config.train, eval_config, progress=args.progress)
        results[name] = evaluate_model(
            ParsRecScorer(model), splits, Split.TEST, ds.n_items, eval_config, progress=False
        )

    base = results["default"].ndcg[10]
    with open(config.out_dir / "ablation.csv", "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(ABLATION_HEADER)
        for name, r in results.items():
            writer.writerow(
                [
                    name,
                    *(f"{v:.6f}" for v in (r.hr[10], r.ndcg[10], r.sess_prec[10])),
                    f"{r.ndcg[10] - base:+.6f}",
                ]
            )
    print(f"{'variant':<14}{'HR@10':>9}{'NDCG@10':>9}{'SP@10':>9}{'dNDCG':>9}")
    for name, r in results.items():
        print(
            f"{name:<14}{r.hr[10]:>9.4f}{r.ndcg[10]:>9.4f}{r.sess_prec[10]:>9.4f}"
            f"{r.ndcg[10] - base:>+9.4f}"
        )


COMMANDS = {
    "synth": run_synth,
    "train": run_train,
    "eval": run_eval,
    "analyze": run_analyze,
    "spillover": run_spillover,
    "ablate": run_ablate,
}
