"""Training loops: reconstruction autoencoder and information bottleneck.

Both run full-batch Adam on the 256-row bootstrap matrix and export the
trained encoder as a version-1 transform file (an affine-layer chain the
streaming scorer can load). Learning rate and epoch count are restricted to
the tuning grids used for the published operating points; presets carry the
per-dataset winners.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .models import Autoencoder, BottleneckEncoder, compression_bound

LR_GRID = (1e-2, 1e-3, 1e-4, 1e-5)
EPOCH_GRID = (100, 200, 500, 1000)
BOOTSTRAP_ROWS = 256
ADAM_BETAS = (0.9, 0.999)
IB_NOISE_STD = 1.0  # variance parameter fixed to 1

# (dataset, method) -> (learning rate, epochs): the grid-search winners
PRESET_HYPERPARAMS: dict[tuple[str, str], tuple[float, int]] = {
    ("kdd", "ae"): (1e-2, 100),
    ("kdd", "ib"): (1e-2, 100),
    ("dos", "ae"): (1e-2, 1000),
    ("dos", "ib"): (1e-5, 200),
    ("unsw", "ae"): (1e-2, 100),
    ("unsw", "ib"): (1e-2, 100),
    ("ddos", "ae"): (1e-3, 100),
    ("ddos", "ib"): (1e-3, 200),
}


class TrainerError(ValueError):
    pass


class ShapeError(TrainerError):
    pass


class MissingLabels(TrainerError):
    pass


class NonFiniteLoss(TrainerError):
    def __init__(self, epoch: int):
        super().__init__(f"loss became non-finite at epoch {epoch}")
        self.epoch = epoch


@dataclass
class TrainSpec:
    """One training job over the bootstrap matrix."""

    matrix: np.ndarray  # (rows, d) numeric bootstrap rows
    method: str  # "ae" | "ib"
    out_dim: int = 12
    learning_rate: float = 1e-2
    epochs: int = 100
    ib_beta: float = 0.5
    labels: np.ndarray | None = None  # required for ib
    seed: int = 0
    expected_rows: int = BOOTSTRAP_ROWS  # 0 disables the row check
    adam_betas: tuple[float, float] = ADAM_BETAS

    def validated(self) -> "TrainSpec":
        matrix = np.asarray(self.matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] < 2:
            raise ShapeError("bootstrap matrix must be 2-D with >= 2 rows")
        if self.expected_rows and matrix.shape[0] != self.expected_rows:
            raise ShapeError(
                f"expected {self.expected_rows} bootstrap rows, got "
                f"{matrix.shape[0]} (set expected_rows=0 to allow)"
            )
        if self.method not in ("ae", "ib"):
            raise TrainerError(f"unknown method {self.method!r}")
        if not (0 < self.out_dim <= matrix.shape[1]):
            raise ShapeError(
                f"out_dim {self.out_dim} not in 1..{matrix.shape[1]}"
            )
        if self.learning_rate not in LR_GRID:
            raise TrainerError(
                f"learning rate {self.learning_rate} outside the grid {LR_GRID}"
            )
        if self.epochs not in EPOCH_GRID:
            raise TrainerError(
                f"epoch count {self.epochs} outside the grid {EPOCH_GRID}"
            )
        if self.method == "ib":
            if self.labels is None:
                raise MissingLabels("information bottleneck needs labels")
            labels = np.asarray(self.labels)
            if labels.shape != (matrix.shape[0],):
                raise ShapeError(
                    f"labels shape {labels.shape} != ({matrix.shape[0]},)"
                )
        return self


@dataclass
class TrainResult:
    """Trained encoder plus its loss trajectory."""

    layers: list[tuple[np.ndarray, np.ndarray, str]]
    losses: list[float]
    in_dim: int
    out_dim: int
    extra: dict = field(default_factory=dict)

    @property
    def initial_loss(self) -> float:
        return self.losses[0]

    @property
    def final_loss(self) -> float:
        return self.losses[-1]

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Numpy replay of the exported encoder (float64)."""
        v = np.asarray(x, dtype=np.float64)
        for weights, bias, activation in self.layers:
            v = v @ weights.T + bias
            if activation == "relu":
                v = np.maximum(v, 0.0)
        return v

    def transform_document(self) -> dict:
        return {
            "version": 1,
            "input_dim": self.in_dim,
            "output_dim": self.out_dim,
            "layers": [
                {
                    "weights": weights.tolist(),
                    "bias": bias.tolist(),
                    "activation": activation,
                }
                for weights, bias, activation in self.layers
            ],
        }

    def export(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.transform_document()),
                              encoding="utf-8")


def _finish(model, losses: list[float], in_dim: int, out_dim: int,
            extra: dict | None = None) -> TrainResult:
    layers = [
        (w.detach().numpy().astype(np.float64).copy(),
         b.detach().numpy().astype(np.float64).copy(),
         activation)
        for w, b, activation in model.encoder_layers()
    ]
    return TrainResult(layers=layers, losses=losses, in_dim=in_dim,
                       out_dim=out_dim, extra=extra or {})


def train_ae(spec: TrainSpec) -> TrainResult:
    """Mean-squared reconstruction training; exports the rectified encoder."""
    spec = spec.validated()
    torch.manual_seed(spec.seed)
    x = torch.as_tensor(np.asarray(spec.matrix), dtype=torch.float32)
    model = Autoencoder(x.shape[1], spec.out_dim)
    optimizer = torch.optim.Adam(model.parameters(), lr=spec.learning_rate,
                                 betas=spec.adam_betas)
    loss_fn = nn.MSELoss()
    losses: list[float] = []
    for epoch in range(spec.epochs):
        optimizer.zero_grad()
        loss = loss_fn(model(x), x)
        if not torch.isfinite(loss):
            raise NonFiniteLoss(epoch + 1)
        loss.backward()
        optimizer.step()
        losses.append(loss.item())
    return _finish(model, losses, x.shape[1], spec.out_dim)


def train_ib(spec: TrainSpec) -> TrainResult:
    """Nonlinear information-bottleneck training.

    Minimizes compression + beta * classification cross-entropy, the
    tractable surrogate of the bottleneck objective with unit-variance
    encoder noise; exports the encoder mean map as a two-layer chain.
    """
    spec = spec.validated()
    torch.manual_seed(spec.seed)
    x = torch.as_tensor(np.asarray(spec.matrix), dtype=torch.float32)
    y = torch.as_tensor(np.asarray(spec.labels), dtype=torch.long)
    model = BottleneckEncoder(x.shape[1], spec.out_dim, noise_std=IB_NOISE_STD)
    optimizer = torch.optim.Adam(model.parameters(), lr=spec.learning_rate,
                                 betas=spec.adam_betas)
    ce = nn.CrossEntropyLoss()
    losses: list[float] = []
    for epoch in range(spec.epochs):
        optimizer.zero_grad()
        means, logits = model(x)
        loss = compression_bound(means, IB_NOISE_STD) + spec.ib_beta * ce(logits, y)
        if not torch.isfinite(loss):
            raise NonFiniteLoss(epoch + 1)
        loss.backward()
        optimizer.step()
        losses.append(loss.item())
    with torch.no_grad():
        predictions = model.classifier(model.mean_map(x)).argmax(dim=1)
        accuracy = float((predictions == y).float().mean())
    return _finish(model, losses, x.shape[1], spec.out_dim,
                   extra={"bootstrap_accuracy": accuracy})
