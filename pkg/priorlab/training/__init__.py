from priorlab.training.checkpoint import (
    Checkpoint,
    checkpoint_blocks,
    load_checkpoint,
    save_checkpoint,
    tensor_snapshot,
)
from priorlab.training.trainer import (
    EPOCH_COLUMNS,
    StepReport,
    TrainResult,
    beta_at,
    build_optimizers,
    epoch_batches,
    prior_step,
    train,
    train_prior_post,
    train_step,
    write_epoch_log,
)
from priorlab.training.evaluate import evaluate_bundle
from priorlab.training.sweep import (
    SweepEntry,
    expand_sweep,
    run_entry,
    sweep,
)

__all__ = [
    "Checkpoint",
    "EPOCH_COLUMNS",
    "StepReport",
    "SweepEntry",
    "TrainResult",
    "beta_at",
    "build_optimizers",
    "checkpoint_blocks",
    "epoch_batches",
    "evaluate_bundle",
    "expand_sweep",
    "load_checkpoint",
    "prior_step",
    "run_entry",
    "save_checkpoint",
    "sweep",
    "tensor_snapshot",
    "train",
    "train_prior_post",
    "train_step",
    "write_epoch_log",
]
