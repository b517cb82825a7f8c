"""Lab: the operator surface that wires every package into reproducible runs.

Example:
    from lab import load_config

    config = load_config("lab.toml", ["seed=3", "train.max_epochs=5"])
    print(config.model.heads, config.out_dir)
"""

from .config import SEED_ENV, load_config, parse_override
from .data_models import RunConfig
from .errors import ConfigError, LabError, MissingArtifactError
from .main import build_parser, main
from .run_dir import artifact_version, prepare_run_dir

__all__ = [
    # Config
    "RunConfig",
    "load_config",
    "parse_override",
    "SEED_ENV",
    # Runs
    "prepare_run_dir",
    "artifact_version",
    "build_parser",
    "main",
    # Errors
    "LabError",
    "ConfigError",
    "MissingArtifactError",
]
