from .checkpoint import load_checkpoint, save_checkpoint
from .model import DenoiserModel, denoise_predict, hybrid_loss, hybrid_loss_terms
from .sampling import sample, sample_with_oracle
from .schedule import DiffusionSchedule, cosine_schedule, forward_noise, reverse_step
from .training import TrainConfig, TrainResult, make_val_batch, train, write_training_log

__all__ = [
    "DenoiserModel", "DiffusionSchedule", "TrainConfig", "TrainResult",
    "cosine_schedule", "denoise_predict", "forward_noise", "hybrid_loss",
    "hybrid_loss_terms", "load_checkpoint", "make_val_batch", "reverse_step",
    "sample", "sample_with_oracle", "save_checkpoint", "train", "write_training_log",
]
