"""The fully resolved configuration of one laboratory run."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from analysis import AnalysisConfig
from evaluation import EvalConfig
from parsrec import ModelConfig
from synth import SynthConfig
from training import TrainConfig


@dataclass
class RunConfig:
    """Defaults, then the TOML file, then PARSREC_SEED, then CLI overrides.

    ``model.n_items`` follows the synth config; a run on an existing dataset
    replaces it with the dataset's item count.
    """

    synth: SynthConfig = field(default_factory=SynthConfig)
    model: ModelConfig = field(default_factory=lambda: ModelConfig(n_items=SynthConfig().n_items))
    train: TrainConfig = field(default_factory=TrainConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    seed: int = 0
    out: str = "runs/desk"

    @property
    def out_dir(self) -> Path:
        return Path(self.out)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)
