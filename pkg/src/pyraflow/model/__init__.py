from .checkpoint import load_checkpoint, save_checkpoint
from .fields import NeighborhoodField, PointField, VelocityField
from .metrics import block_residual_autocorrelation, chord_deviation, energy_distance
from .net import Adam, MlpNet, time_stage_features
from .train import (
    TrainConfig,
    pattern_dataset,
    sample_images,
    sample_toy_trajectories,
    train_tinyimage,
    train_toy2d,
)

__all__ = [
    "Adam",
    "MlpNet",
    "NeighborhoodField",
    "PointField",
    "TrainConfig",
    "VelocityField",
    "block_residual_autocorrelation",
    "chord_deviation",
    "energy_distance",
    "load_checkpoint",
    "pattern_dataset",
    "sample_images",
    "sample_toy_trajectories",
    "save_checkpoint",
    "time_stage_features",
    "train_tinyimage",
    "train_toy2d",
]
