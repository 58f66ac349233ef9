"""Offline trainers for nonlinear embedding transforms.

Trains a reconstruction autoencoder or a nonlinear information bottleneck
on a small bootstrap matrix and exports the encoder as a portable affine-
layer chain (transform file, version 1) consumed by the streaming scorer.
"""

from .models import Autoencoder, BottleneckEncoder, compression_bound
from .train import (
    ADAM_BETAS,
    BOOTSTRAP_ROWS,
    EPOCH_GRID,
    LR_GRID,
    PRESET_HYPERPARAMS,
    MissingLabels,
    NonFiniteLoss,
    ShapeError,
    TrainerError,
    TrainResult,
    TrainSpec,
    train_ae,
    train_ib,
)

__version__ = "0.1.0"

__all__ = [
    "ADAM_BETAS",
    "Autoencoder",
    "BOOTSTRAP_ROWS",
    "BottleneckEncoder",
    "EPOCH_GRID",
    "LR_GRID",
    "MissingLabels",
    "NonFiniteLoss",
    "PRESET_HYPERPARAMS",
    "ShapeError",
    "TrainResult",
    "TrainSpec",
    "TrainerError",
    "compression_bound",
    "train_ae",
    "train_ib",
]
