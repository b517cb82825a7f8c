"""Training: teacher-forced unrolls over similar-size batches, early stopping, checkpoints.

At every step the model's greedy prediction is fed when it is still in the
basket, otherwise a random remaining item, so each basket is covered in
exactly as many steps as it has items.

Example:
    from evaluation import make_splits
    from training import TrainConfig, fit, save_checkpoint

    history = fit(model, make_splits(dataset), TrainConfig(max_epochs=30, seed=7))
    save_checkpoint("runs/desk/model.ckpt", model, epoch=history.best_epoch)
"""

from parsrec import teacher_force_next

from .batching import plan_batches, training_sessions
from .checkpoint import FORMAT_VERSION, load_checkpoint, read_checkpoint, save_checkpoint
from .data_models import (
    Batch,
    BatchPlan,
    Checkpoint,
    EpochRecord,
    TrainConfig,
    TrainingHistory,
    TrainingSession,
    Unroll,
)
from .errors import CheckpointError, TrainConfigError, TrainingDivergedError, TrainingError
from .trainer import (
    HISTORY_HEADER,
    Optimizers,
    fit,
    run_training_step,
    unroll,
    write_history_csv,
)

__all__ = [
    # Data models
    "TrainConfig",
    "TrainingSession",
    "Batch",
    "BatchPlan",
    "Unroll",
    "EpochRecord",
    "TrainingHistory",
    "Checkpoint",
    # Batching and feeding
    "training_sessions",
    "plan_batches",
    "teacher_force_next",
    # Optimization
    "Optimizers",
    "unroll",
    "run_training_step",
    "fit",
    "HISTORY_HEADER",
    "write_history_csv",
    # Checkpoints
    "FORMAT_VERSION",
    "save_checkpoint",
    "read_checkpoint",
    "load_checkpoint",
    # Errors
    "TrainingError",
    "TrainConfigError",
    "CheckpointError",
    "TrainingDivergedError",
]
