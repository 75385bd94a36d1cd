"""
Flat binary checkpoint format for networks.

Layout (all integers and floats little-endian):

    header   : magic b"CMNN" | version u16 | input width u32 | layer count u32
    per layer: kind tag u8, then
               dense      -> in u32 | out u32 | W as in*out f64 (row-major) | b as out f64
               leaky_relu -> slope f64
               dropout    -> drop rate f64
               tanh       -> nothing
"""

import struct
from pathlib import Path

import numpy as np

from cyclemimo.exceptions import CheckpointError, DomainError, ShapeError
from cyclemimo.logging import get_logger
from cyclemimo.nn.layers import LayerSpec
from cyclemimo.nn.network import NeuralNet

logger = get_logger(__name__)

NETWORK_MAGIC = b"CMNN"
NETWORK_FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sHII")
_TAG = struct.Struct("<B")
_DIMS = struct.Struct("<II")
_SCALAR = struct.Struct("<d")

_KIND_TAGS = {"dense": 0, "leaky_relu": 1, "dropout": 2, "tanh": 3}
_TAG_KINDS = {tag: kind for kind, tag in _KIND_TAGS.items()}


def network_to_bytes(net: NeuralNet) -> bytes:
    chunks = [_HEADER.pack(NETWORK_MAGIC, NETWORK_FORMAT_VERSION, net.input_width, len(net.layers))]
    slot = 0
    for layer in net.layers:
        chunks.append(_TAG.pack(_KIND_TAGS[layer.kind]))
        if layer.kind == "dense":
            w, b = net.weights[slot], net.biases[slot]
            slot += 1
            chunks.append(_DIMS.pack(*w.shape))
            chunks.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
            chunks.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
        elif layer.kind == "leaky_relu":
            chunks.append(_SCALAR.pack(layer.slope))
        elif layer.kind == "dropout":
            chunks.append(_SCALAR.pack(layer.drop_rate))
    return b"".join(chunks)


def network_from_bytes(data: bytes, offset: int = 0) -> tuple[NeuralNet, int]:
    """Decode one network record starting at `offset`; returns the network and the offset after it."""
    try:
        magic, version, input_width, layer_count = _HEADER.unpack_from(data, offset)
        offset += _HEADER.size
        if magic != NETWORK_MAGIC:
            raise CheckpointError(f"Bad network magic {magic!r}")
        if version != NETWORK_FORMAT_VERSION:
            raise CheckpointError(f"Unsupported network format version {version}")

        layers: list[LayerSpec] = []
        weights: list[np.ndarray] = []
        biases: list[np.ndarray] = []
        for _ in range(layer_count):
            (tag,) = _TAG.unpack_from(data, offset)
            offset += _TAG.size
            kind = _TAG_KINDS.get(tag)
            if kind is None:
                raise CheckpointError(f"Unknown layer tag {tag}")
            if kind == "dense":
                rows, cols = _DIMS.unpack_from(data, offset)
                offset += _DIMS.size
                w = np.frombuffer(data, dtype="<f8", count=rows * cols, offset=offset).reshape(rows, cols)
                offset += 8 * rows * cols
                b = np.frombuffer(data, dtype="<f8", count=cols, offset=offset)
                offset += 8 * cols
                weights.append(w.astype(np.float64))
                biases.append(b.astype(np.float64))
                layers.append(LayerSpec.dense(cols))
            elif kind == "leaky_relu":
                (slope,) = _SCALAR.unpack_from(data, offset)
                offset += _SCALAR.size
                layers.append(LayerSpec.leaky_relu(slope))
            elif kind == "dropout":
                (rate,) = _SCALAR.unpack_from(data, offset)
                offset += _SCALAR.size
                layers.append(LayerSpec.dropout(rate))
            else:
                layers.append(LayerSpec.tanh())
        net = NeuralNet(input_width, layers, weights, biases)
    except (struct.error, ValueError) as e:
        logger.error("Truncated or corrupt network checkpoint", offset=offset, error=str(e))
        raise CheckpointError("Truncated or corrupt network checkpoint") from e
    except (DomainError, ShapeError) as e:
        logger.error("Inconsistent network checkpoint", offset=offset, error=str(e))
        raise CheckpointError(f"Inconsistent network checkpoint: {e}") from e

    return net, offset


def save_network(net: NeuralNet, path: Path) -> None:
    path.write_bytes(network_to_bytes(net))
    logger.debug("Saved network checkpoint", path=str(path), layers=len(net.layers))


def load_network(path: Path) -> NeuralNet:
    try:
        data = path.read_bytes()
    except OSError as e:
        logger.error("Error reading network checkpoint", path=str(path), error=str(e))
        raise CheckpointError("Error reading network checkpoint") from e
    net, end = network_from_bytes(data)
    if end != len(data):
        raise CheckpointError(f"Trailing bytes after network record ({len(data) - end})")
    return net
