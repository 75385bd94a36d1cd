"""Layer vocabulary of the feed-forward engine."""

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np

from cyclemimo.constants import DEFAULT_DROPOUT_RATE, DEFAULT_LEAKY_SLOPE
from cyclemimo.exceptions import DomainError, ShapeError

LayerKind = Literal["dense", "leaky_relu", "dropout", "tanh"]
Mode = Literal["train", "eval"]


@dataclass(frozen=True)
class LayerSpec:
    kind: LayerKind
    width: int | None = None
    slope: float = DEFAULT_LEAKY_SLOPE
    drop_rate: float = DEFAULT_DROPOUT_RATE

    def __post_init__(self) -> None:
        if self.kind == "dense" and (self.width is None or self.width < 1):
            raise DomainError(f"Dense layer needs a positive width, got {self.width}")
        if self.kind == "leaky_relu" and not self.slope > 0:
            raise DomainError(f"Leaky ReLU slope must be positive, got {self.slope}")
        if self.kind == "dropout" and not 0.0 <= self.drop_rate < 1.0:
            raise DomainError(f"Dropout rate must lie in [0, 1), got {self.drop_rate}")

    @classmethod
    def dense(cls, width: int) -> "LayerSpec":
        return cls(kind="dense", width=width)

    @classmethod
    def leaky_relu(cls, slope: float = DEFAULT_LEAKY_SLOPE) -> "LayerSpec":
        return cls(kind="leaky_relu", slope=slope)

    @classmethod
    def dropout(cls, drop_rate: float = DEFAULT_DROPOUT_RATE) -> "LayerSpec":
        return cls(kind="dropout", drop_rate=drop_rate)

    @classmethod
    def tanh(cls) -> "LayerSpec":
        return cls(kind="tanh")


def dense_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Affine map `x @ W + b` for a batch of row vectors."""
    if x.ndim != 2 or W.ndim != 2 or b.ndim != 1:
        raise ShapeError(f"Dense forward expects 2-D x and W and 1-D b, got {x.shape}, {W.shape}, {b.shape}")
    if x.shape[1] != W.shape[0]:
        raise ShapeError(f"Input of shape {x.shape} does not chain into weights of shape {W.shape}")
    if b.shape[0] != W.shape[1]:
        raise ShapeError(f"Bias of shape {b.shape} does not match weights of shape {W.shape}")
    return x @ W + b


def glorot_uniform(fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def mlp_layers(
    hidden: Sequence[int],
    output_width: int,
    slope: float,
    drop_rate: float,
    *,
    output_activation: bool,
) -> list[LayerSpec]:
    """Dense/LeakyReLU/Dropout blocks followed by a dense output, optionally tanh-squashed."""
    layers: list[LayerSpec] = []
    for width in hidden:
        layers.extend([LayerSpec.dense(width), LayerSpec.leaky_relu(slope), LayerSpec.dropout(drop_rate)])
    layers.append(LayerSpec.dense(output_width))
    if output_activation:
        layers.append(LayerSpec.tanh())
    return layers
