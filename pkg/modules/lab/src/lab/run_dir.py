"""Run directories: the config echo, the run record and artifact paths."""

from __future__ import annotations

import json
import logging
import subprocess
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

from .data_models import RunConfig
from .errors import MissingArtifactError

logger = logging.getLogger(__name__)

DATASET = "dataset.jsonl"
CHECKPOINT = "model.ckpt"


def artifact_version() -> str:
    """``git describe`` of the working tree, or ``"unknown"`` outside a checkout."""
    try:
        result = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            check=False,
            timeout=10,
        )
    except (OSError, subprocess.TimeoutExpired):
        return "unknown"
    return result.stdout.strip() if result.returncode == 0 and result.stdout.strip() else "unknown"


def package_version() -> str:
    try:
        return version("lab")
    except PackageNotFoundError:
        return "unknown"


def prepare_run_dir(config: RunConfig, command: str) -> Path:
    """Create the run directory and write ``config.json`` and ``run.json``."""
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "config.json", "w") as f:
        json.dump(config.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    record = {
        "command": command,
        "seed": config.seed,
        "version": package_version(),
        "git": artifact_version(),
    }
    with open(out / "run.json", "w") as f:
        json.dump(record, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info("Run directory %s (%s, seed %d)", out, command, config.seed)
    return out


def require(path: str | Path, produced_by: str) -> Path:
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(f"{path} not found; run `parsrec-lab {produced_by}` first")
    return path
