"""Dimensionality-reduction front end for the numeric columns.

The engine can replace the raw numeric columns with a lower-dimensional
embedding before hashing: either a PCA transform fitted on a bootstrap
buffer of the first 256 records, or an externally trained transform loaded
from a portable JSON file. A transform is a chain of affine layers with an
optional rectifier, applied sequentially; categorical columns pass through
untouched.

Transform file format (version 1), the contract with external trainers:

    {"version": 1, "input_dim": d, "output_dim": m,
     "layers": [{"weights": [[...], ...],   # row-major, out x in
                 "bias": [...],
                 "activation": "none" | "relu"}, ...]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

BOOTSTRAP_CAPACITY = 256
DEFAULT_OUT_DIM = 12


class TransformError(ValueError):
    pass


class ParseError(TransformError):
    """Transform file is not well-formed."""


class DimChainError(TransformError):
    """Layer shapes do not chain, or a bias length disagrees."""


class UnknownActivation(TransformError):
    def __init__(self, name: str):
        super().__init__(f"unknown activation {name!r} (expected 'none' or 'relu')")
        self.name = name


class BufferNotFull(TransformError):
    pass


class OutDimTooLarge(TransformError):
    pass


class DimensionMismatch(TransformError):
    pass


class Activation(str, Enum):
    NONE = "none"
    RECTIFIER = "relu"


@dataclass(frozen=True)
class AffineLayer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: Activation = Activation.NONE

    def __post_init__(self) -> None:
        if self.weights.ndim != 2 or self.bias.ndim != 1:
            raise DimChainError("weights must be 2-D and bias 1-D")
        if self.bias.shape[0] != self.weights.shape[0]:
            raise DimChainError(
                f"bias length {self.bias.shape[0]} != weight rows "
                f"{self.weights.shape[0]}"
            )

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class Transform:
    """Chain of affine layers mapping input_dim reals to output_dim reals."""

    layers: tuple[AffineLayer, ...]
    explained_variance_ratio: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not self.layers:
            raise DimChainError("transform needs at least one layer")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.out_dim != nxt.in_dim:
                raise DimChainError(
                    f"layer output {prev.out_dim} does not chain into "
                    f"layer input {nxt.in_dim}"
                )

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim


def apply(transform: Transform, x) -> np.ndarray:
    """Run x through the layer chain; rectifier clamps negatives to zero."""
    v = np.asarray(x, dtype=np.float64)
    if v.shape[-1] != transform.input_dim:
        raise DimensionMismatch(
            f"expected {transform.input_dim} inputs, got {v.shape[-1]}"
        )
    for layer in transform.layers:
        v = v @ layer.weights.T + layer.bias
        if layer.activation is Activation.RECTIFIER:
            v = np.maximum(v, 0.0)
    return v


class BootstrapBuffer:
    """Numeric parts of the first records, up to a fixed capacity."""

    def __init__(self, n_dims: int, capacity: int = BOOTSTRAP_CAPACITY):
        self.capacity = capacity
        self.n_dims = n_dims
        self._rows: list[tuple[float, ...]] = []

    def __len__(self) -> int:
        return len(self._rows)

    @property
    def full(self) -> bool:
        return len(self._rows) >= self.capacity

    def add(self, nums) -> None:
        if self.full:
            raise ValueError("bootstrap buffer already full")
        self._rows.append(tuple(nums))

    def matrix(self) -> np.ndarray:
        return np.asarray(self._rows, dtype=np.float64).reshape(
            len(self._rows), self.n_dims
        )


def fit_pca_rows(rows: np.ndarray, out_dim: int) -> Transform:
    """PCA transform from a sample matrix: top axes of the sample covariance.

    Deterministic: symmetric eigendecomposition, axes ordered by descending
    eigenvalue, each axis flipped so its largest-magnitude entry is positive.
    """
    rows = np.asarray(rows, dtype=np.float64)
    n, d = rows.shape
    if out_dim > d:
        raise OutDimTooLarge(f"out_dim {out_dim} exceeds numeric dimension {d}")
    if n < 2:
        raise BufferNotFull("need at least two rows to fit")
    mean = rows.mean(axis=0)
    centered = rows - mean
    cov = centered.T @ centered / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    axes = eigvecs[:, order].T  # rows are principal axes
    for i in range(axes.shape[0]):
        pivot = np.argmax(np.abs(axes[i]))
        if axes[i, pivot] < 0:
            axes[i] = -axes[i]
    w = axes[:out_dim]
    total_var = float(eigvals.sum())
    ratios = tuple(
        float(v) / total_var if total_var > 0 else 0.0 for v in eigvals[:out_dim]
    )
    layer = AffineLayer(weights=w, bias=-(w @ mean), activation=Activation.NONE)
    return Transform(layers=(layer,), explained_variance_ratio=ratios)


def fit_pca(buffer: BootstrapBuffer, out_dim: int) -> Transform:
    """Fit PCA on a full bootstrap buffer."""
    if not buffer.full:
        raise BufferNotFull(
            f"bootstrap buffer holds {len(buffer)} of {buffer.capacity} records"
        )
    return fit_pca_rows(buffer.matrix(), out_dim)


def save_transform(transform: Transform, path: str | Path) -> None:
    doc = {
        "version": 1,
        "input_dim": transform.input_dim,
        "output_dim": transform.output_dim,
        "layers": [
            {
                "weights": layer.weights.tolist(),
                "bias": layer.bias.tolist(),
                "activation": layer.activation.value,
            }
            for layer in transform.layers
        ],
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_transform(path: str | Path) -> Transform:
    """Load and validate a version-1 transform file."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read transform file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("transform document must be a JSON object")
    if doc.get("version") != 1:
        raise ParseError(f"unsupported transform version: {doc.get('version')!r}")
    for key in ("input_dim", "output_dim", "layers"):
        if key not in doc:
            raise ParseError(f"transform document missing {key!r}")
    layers = []
    for i, spec in enumerate(doc["layers"]):
        act_name = spec.get("activation", "none")
        try:
            act = Activation(act_name)
        except ValueError:
            raise UnknownActivation(act_name) from None
        try:
            weights = np.asarray(spec["weights"], dtype=np.float64)
            bias = np.asarray(spec["bias"], dtype=np.float64)
        except (KeyError, ValueError) as exc:
            raise ParseError(f"layer {i}: {exc}") from exc
        if weights.ndim != 2 or bias.ndim != 1:
            raise DimChainError(f"layer {i}: weights must be 2-D, bias 1-D")
        if bias.shape[0] != weights.shape[0]:
            raise DimChainError(
                f"layer {i}: bias length {bias.shape[0]} != weight rows "
                f"{weights.shape[0]}"
            )
        layers.append(AffineLayer(weights=weights, bias=bias, activation=act))
    transform = Transform(layers=tuple(layers))
    if transform.input_dim != doc["input_dim"]:
        raise DimChainError(
            f"declared input_dim {doc['input_dim']} != first layer {transform.input_dim}"
        )
    if transform.output_dim != doc["output_dim"]:
        raise DimChainError(
            f"declared output_dim {doc['output_dim']} != last layer "
            f"{transform.output_dim}"
        )
    return transform
