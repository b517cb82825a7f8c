"""Exceptions raised while training or persisting a model."""


class TrainingError(Exception):
    """Base class for training errors."""


class TrainConfigError(TrainingError, ValueError):
    """A TrainConfig field is out of range."""


class CheckpointError(TrainingError, ValueError):
    """A checkpoint file is corrupt, truncated or does not match the expected config."""


class TrainingDivergedError(TrainingError, RuntimeError):
    """The loss or the gradient norm became NaN or infinite."""
