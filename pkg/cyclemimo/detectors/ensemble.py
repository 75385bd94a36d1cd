"""
The four networks of one neural detector, their optimizers and per-block training state.

Checkpoint layout (little-endian):

    magic b"CMEN" | version u16 | streams u32
    pilot weights alpha, beta, gamma, delta f64 | data weights alpha, beta, gamma, delta f64
    scale flag u8 | if set: s_scale and y_scale as 2*streams f64 each
    network records for G_s2y, G_y2s, D_s2y, D_y2s
"""

import copy
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from cyclemimo.constants import (
    DEFAULT_DISCRIMINATOR_HIDDEN,
    DEFAULT_DROPOUT_RATE,
    DEFAULT_GENERATOR_HIDDEN,
    DEFAULT_LEAKY_SLOPE,
)
from cyclemimo.detectors.preprocessing import PreprocScales
from cyclemimo.exceptions import CheckpointError
from cyclemimo.logging import get_logger
from cyclemimo.models import LossWeights
from cyclemimo.nn import AdamState, NeuralNet, network_from_bytes, network_to_bytes
from cyclemimo.nn.layers import mlp_layers

logger = get_logger(__name__)

ENSEMBLE_MAGIC = b"CMEN"
ENSEMBLE_FORMAT_VERSION = 1
NETWORK_NAMES = ("g_s2y", "g_y2s", "d_s2y", "d_y2s")

_HEADER = struct.Struct("<4sHI")
_WEIGHTS = struct.Struct("<8d")
_FLAG = struct.Struct("<B")


@dataclass
class DetectorEnsemble:
    g_s2y: NeuralNet
    g_y2s: NeuralNet
    d_s2y: NeuralNet
    d_y2s: NeuralNet
    pilot_weights: LossWeights = field(default_factory=LossWeights)
    data_weights: LossWeights = field(default_factory=LossWeights)
    optimizers: dict[str, AdamState] = field(default_factory=dict)
    scales: PreprocScales | None = None
    best_val_ber: float | None = None
    pseudo_labels: np.ndarray | None = None
    train_s: np.ndarray | None = None
    train_y: np.ndarray | None = None
    val_s: np.ndarray | None = None
    val_y: np.ndarray | None = None

    @property
    def streams(self) -> int:
        return self.g_y2s.output_width // 2

    def networks(self) -> dict[str, NeuralNet]:
        return {name: getattr(self, name) for name in NETWORK_NAMES}

    def optimizer(self, name: str, template: AdamState | None = None) -> AdamState:
        if name not in self.optimizers:
            base = template or AdamState()
            self.optimizers[name] = AdamState(
                learning_rate=base.learning_rate,
                beta1=base.beta1,
                beta2=base.beta2,
                epsilon=base.epsilon,
                l2_coeff=base.l2_coeff,
            )
        return self.optimizers[name]

    def reseed(self, rng: np.random.Generator) -> None:
        """Point every network's dropout stream at `rng`."""
        for net in self.networks().values():
            net.rng = rng

    def clone(self) -> "DetectorEnsemble":
        return copy.deepcopy(self)

    def adopt(self, other: "DetectorEnsemble") -> None:
        """Take over all state of `other` in place."""
        self.__dict__.update(copy.deepcopy(other.__dict__))


def build_ensemble(
    streams: int,
    rng: np.random.Generator,
    *,
    generator_hidden: tuple[int, ...] = DEFAULT_GENERATOR_HIDDEN,
    discriminator_hidden: tuple[int, ...] = DEFAULT_DISCRIMINATOR_HIDDEN,
    slope: float = DEFAULT_LEAKY_SLOPE,
    drop_rate: float = DEFAULT_DROPOUT_RATE,
    pilot_weights: LossWeights | None = None,
    data_weights: LossWeights | None = None,
) -> DetectorEnsemble:
    width = 2 * streams
    g_layers = mlp_layers(generator_hidden, width, slope, drop_rate, output_activation=True)
    d_layers = mlp_layers(discriminator_hidden, 1, slope, drop_rate, output_activation=False)
    ensemble = DetectorEnsemble(
        g_s2y=NeuralNet.build(width, g_layers, rng),
        g_y2s=NeuralNet.build(width, g_layers, rng),
        d_s2y=NeuralNet.build(2 * width, d_layers, rng),
        d_y2s=NeuralNet.build(2 * width, d_layers, rng),
        pilot_weights=pilot_weights or LossWeights(),
        data_weights=data_weights or LossWeights(),
    )
    logger.debug(
        "Built detector ensemble",
        streams=streams,
        generator_hidden=list(generator_hidden),
        discriminator_hidden=list(discriminator_hidden),
    )
    return ensemble


def _weights_tuple(w: LossWeights) -> tuple[float, float, float, float]:
    return (w.alpha, w.beta, w.gamma, w.delta)


def ensemble_to_bytes(ensemble: DetectorEnsemble) -> bytes:
    chunks = [
        _HEADER.pack(ENSEMBLE_MAGIC, ENSEMBLE_FORMAT_VERSION, ensemble.streams),
        _WEIGHTS.pack(*_weights_tuple(ensemble.pilot_weights), *_weights_tuple(ensemble.data_weights)),
    ]
    if ensemble.scales is None:
        chunks.append(_FLAG.pack(0))
    else:
        chunks.append(_FLAG.pack(1))
        chunks.append(np.ascontiguousarray(ensemble.scales.s_scale, dtype="<f8").tobytes())
        chunks.append(np.ascontiguousarray(ensemble.scales.y_scale, dtype="<f8").tobytes())
    chunks.extend(network_to_bytes(net) for net in ensemble.networks().values())
    return b"".join(chunks)


def ensemble_from_bytes(data: bytes) -> DetectorEnsemble:
    try:
        magic, version, streams = _HEADER.unpack_from(data, 0)
        offset = _HEADER.size
        if magic != ENSEMBLE_MAGIC:
            raise CheckpointError(f"Bad ensemble magic {magic!r}")
        if version != ENSEMBLE_FORMAT_VERSION:
            raise CheckpointError(f"Unsupported ensemble format version {version}")
        values = _WEIGHTS.unpack_from(data, offset)
        offset += _WEIGHTS.size
        (has_scales,) = _FLAG.unpack_from(data, offset)
        offset += _FLAG.size
        scales = None
        if has_scales:
            width = 2 * streams
            s_scale = np.frombuffer(data, dtype="<f8", count=width, offset=offset).astype(np.float64)
            offset += 8 * width
            y_scale = np.frombuffer(data, dtype="<f8", count=width, offset=offset).astype(np.float64)
            offset += 8 * width
            scales = PreprocScales(s_scale=s_scale, y_scale=y_scale)
        pilot_weights = LossWeights(alpha=values[0], beta=values[1], gamma=values[2], delta=values[3])
        data_weights = LossWeights(alpha=values[4], beta=values[5], gamma=values[6], delta=values[7])
    except (struct.error, ValueError) as e:
        logger.error("Truncated or corrupt ensemble checkpoint", error=str(e))
        raise CheckpointError("Truncated or corrupt ensemble checkpoint") from e

    nets: dict[str, NeuralNet] = {}
    for name in NETWORK_NAMES:
        nets[name], offset = network_from_bytes(data, offset)
    if offset != len(data):
        raise CheckpointError(f"Trailing bytes after ensemble record ({len(data) - offset})")

    return DetectorEnsemble(**nets, pilot_weights=pilot_weights, data_weights=data_weights, scales=scales)


def save_ensemble(ensemble: DetectorEnsemble, path: Path) -> None:
    path.write_bytes(ensemble_to_bytes(ensemble))
    logger.info("Saved ensemble checkpoint", path=str(path))


def load_ensemble(path: Path) -> DetectorEnsemble:
    try:
        data = path.read_bytes()
    except OSError as e:
        logger.error("Error reading ensemble checkpoint", path=str(path), error=str(e))
        raise CheckpointError("Error reading ensemble checkpoint") from e
    return ensemble_from_bytes(data)
