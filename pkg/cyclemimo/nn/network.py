"""Feed-forward network with manual backpropagation."""

import copy
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from cyclemimo.exceptions import NetworkStateError, NumericError, ShapeError
from cyclemimo.logging import get_logger
from cyclemimo.nn.layers import LayerSpec, Mode, dense_forward, glorot_uniform

logger = get_logger(__name__)


@dataclass
class Trace:
    """Per-layer inputs, outputs and dropout masks of one train-mode forward pass."""

    inputs: list[np.ndarray] = field(default_factory=list)
    outputs: list[np.ndarray] = field(default_factory=list)
    masks: dict[int, np.ndarray] = field(default_factory=dict)


class NeuralNet:
    def __init__(
        self,
        input_width: int,
        layers: Sequence[LayerSpec],
        weights: Sequence[np.ndarray],
        biases: Sequence[np.ndarray],
        rng: np.random.Generator | None = None,
    ):
        self.input_width = input_width
        self.layers = list(layers)
        self.weights = [np.array(w, dtype=np.float64) for w in weights]
        self.biases = [np.array(b, dtype=np.float64) for b in biases]
        self.rng = rng if rng is not None else np.random.default_rng()
        self.mode: Mode = "eval"
        self._dense_slots: dict[int, int] = {}
        self._trace: Trace | None = None

        width = input_width
        for index, layer in enumerate(self.layers):
            if layer.kind != "dense":
                continue
            slot = len(self._dense_slots)
            if slot >= len(self.weights):
                raise ShapeError(f"Missing parameters for dense layer {index}")
            expected = (width, layer.width)
            if self.weights[slot].shape != expected or self.biases[slot].shape != (layer.width,):
                raise ShapeError(
                    f"Dense layer {index} expects weights {expected} and bias ({layer.width},), "
                    f"got {self.weights[slot].shape} and {self.biases[slot].shape}"
                )
            self._dense_slots[index] = slot
            width = layer.width  # type: ignore[assignment]
        if len(self._dense_slots) != len(self.weights):
            raise ShapeError(f"Got {len(self.weights)} weight matrices for {len(self._dense_slots)} dense layers")
        self.output_width = width

        self.grad_weights = [np.zeros_like(w) for w in self.weights]
        self.grad_biases = [np.zeros_like(b) for b in self.biases]

    @classmethod
    def build(cls, input_width: int, layers: Sequence[LayerSpec], rng: np.random.Generator) -> "NeuralNet":
        """Create a network with Glorot-uniform weights and zero biases."""
        weights: list[np.ndarray] = []
        biases: list[np.ndarray] = []
        width = input_width
        for layer in layers:
            if layer.kind == "dense":
                weights.append(glorot_uniform(width, layer.width, rng))  # type: ignore[arg-type]
                biases.append(np.zeros(layer.width))  # type: ignore[arg-type]
                width = layer.width  # type: ignore[assignment]
        return cls(input_width, layers, weights, biases, rng=rng)

    def parameters(self) -> list[np.ndarray]:
        return [p for pair in zip(self.weights, self.biases, strict=True) for p in pair]

    def gradients(self) -> list[np.ndarray]:
        return [g for pair in zip(self.grad_weights, self.grad_biases, strict=True) for g in pair]

    def zero_grad(self) -> None:
        for g in self.gradients():
            g.fill(0.0)

    def clone(self) -> "NeuralNet":
        return copy.deepcopy(self)

    def forward(self, x: np.ndarray, mode: Mode | None = None) -> np.ndarray:
        """Apply all layers; a train-mode pass keeps its trace for the next `backward`."""
        out, trace = self._run(x, mode or self.mode)
        self._trace = trace
        return out

    def forward_traced(self, x: np.ndarray, mode: Mode = "train") -> tuple[np.ndarray, Trace]:
        """Forward pass returning its own trace, so one network can be differentiated at several inputs."""
        out, trace = self._run(x, mode)
        if trace is None:
            raise NetworkStateError("Traced forward requires train mode")
        return out, trace

    def _run(self, x: np.ndarray, mode: Mode) -> tuple[np.ndarray, Trace | None]:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.input_width:
            raise ShapeError(f"Network expects input of width {self.input_width}, got shape {x.shape}")

        trace = Trace() if mode == "train" else None
        h = x
        for index, layer in enumerate(self.layers):
            if trace is not None:
                trace.inputs.append(h)
            if layer.kind == "dense":
                slot = self._dense_slots[index]
                h = dense_forward(h, self.weights[slot], self.biases[slot])
            elif layer.kind == "leaky_relu":
                h = np.where(h > 0, h, layer.slope * h)
            elif layer.kind == "tanh":
                h = np.tanh(h)
            elif layer.kind == "dropout" and mode == "train" and layer.drop_rate > 0:
                keep = 1.0 - layer.drop_rate
                mask = (self.rng.random(h.shape) < keep) / keep
                h = h * mask
                if trace is not None:
                    trace.masks[index] = mask
            if not np.all(np.isfinite(h)):
                logger.error("Non-finite activation", layer_index=index, layer_kind=layer.kind)
                raise NumericError(f"Non-finite activation after layer {index} ({layer.kind})", layer_index=index)
            if trace is not None:
                trace.outputs.append(h)
        return h, trace

    def backward(self, upstream_grad: np.ndarray, trace: Trace | None = None) -> np.ndarray:
        """
        Accumulate parameter gradients and return the gradient with respect to the input.
        Without an explicit trace the one kept by the last train-mode `forward` is used up.
        """
        if trace is None:
            trace, self._trace = self._trace, None
        if trace is None:
            raise NetworkStateError("Backward called without a preceding train-mode forward pass")

        g = np.asarray(upstream_grad, dtype=np.float64)
        if g.shape != trace.outputs[-1].shape:
            raise ShapeError(f"Upstream gradient of shape {g.shape} does not match output {trace.outputs[-1].shape}")

        for index in reversed(range(len(self.layers))):
            layer = self.layers[index]
            x_in = trace.inputs[index]
            if layer.kind == "dense":
                slot = self._dense_slots[index]
                self.grad_weights[slot] += x_in.T @ g
                self.grad_biases[slot] += g.sum(axis=0)
                g = g @ self.weights[slot].T
            elif layer.kind == "leaky_relu":
                g = g * np.where(x_in > 0, 1.0, layer.slope)
            elif layer.kind == "tanh":
                g = g * (1.0 - trace.outputs[index] ** 2)
            elif layer.kind == "dropout" and index in trace.masks:
                g = g * trace.masks[index]
        return g


def net_forward(net: NeuralNet, x: np.ndarray, mode: Mode) -> np.ndarray:
    return net.forward(x, mode)


def net_backward(net: NeuralNet, upstream_grad: np.ndarray) -> np.ndarray:
    return net.backward(upstream_grad)
