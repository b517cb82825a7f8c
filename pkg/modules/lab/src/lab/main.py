"""CLI entry point for the PARSRec desk laboratory.

Usage:
    uv run parsrec-lab synth --config lab.toml --out runs/desk
    uv run parsrec-lab train --config lab.toml --out runs/desk
    uv run parsrec-lab eval --out runs/desk --k 1,5,10
    uv run parsrec-lab spillover --out runs/desk --removed-category 0
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from analysis import AnalysisError
from evaluation import EvaluationError
from numerics import NumericsError
from parsrec import ParsRecError
from synth import SynthError
from training import TrainingError

from .commands import COMMANDS
from .config import load_config
from .errors import LabError
from .run_dir import prepare_run_dir

logger = logging.getLogger(__name__)

OPERATOR_ERRORS = (
    LabError,
    SynthError,
    ParsRecError,
    EvaluationError,
    TrainingError,
    AnalysisError,
    NumericsError,
    ValueError,
    OSError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parsrec-lab",
        description="Synthesize baskets, train PARSRec, evaluate and analyze it",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run config")
    common.add_argument("--seed", type=int, help="Run seed (overrides PARSREC_SEED)")
    common.add_argument("--out", help="Run directory")
    common.add_argument("--dataset", help="Dataset file (default: <out>/dataset.jsonl)")
    common.add_argument("--checkpoint", help="Checkpoint file (default: <out>/model.ckpt)")
    common.add_argument("--k", help="Comma-separated metric cutoffs, e.g. 1,5,10")
    common.add_argument("--removed-category", type=int, help="Category taken off the shelf")
    common.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="Override one config value; repeatable",
    )
    common.add_argument(
        "--no-progress", dest="progress", action="store_false", help="Hide progress bars"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("synth", "Generate and validate a synthetic dataset"),
        ("train", "Train with early stopping and write a checkpoint"),
        ("eval", "Score the checkpoint, POPRec and random ranking on the test split"),
        ("analyze", "Attention heatmaps and embedding similarity"),
        ("spillover", "Predicted category sales with one category removed"),
        ("ablate", "Train and evaluate every architecture ablation"),
    ):
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def overrides_from_args(args: argparse.Namespace) -> list[str]:
    """CLI flags as ``key=value`` overrides, applied after ``--set`` so flags win."""
    overrides = list(args.set)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.out is not None:
        overrides.append(f"out={args.out!r}")
    if args.k is not None:
        overrides.append(f"eval.ks=[{args.k}]")
    if args.removed_category is not None:
        overrides.append(f"analysis.removed_category={args.removed_category}")
    return overrides


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("LOG_LEVEL", "INFO").upper(),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, overrides_from_args(args))
        prepare_run_dir(config, args.command)
        COMMANDS[args.command](config, args)
    except OPERATOR_ERRORS as e:
        logger.debug("%s failed", args.command, exc_info=True)
        print(f"parsrec-lab {args.command}: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
