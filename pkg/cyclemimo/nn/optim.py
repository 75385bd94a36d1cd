"""Adam with L2 gradient augmentation."""

from dataclasses import dataclass, field

import numpy as np

from cyclemimo.constants import (
    DEFAULT_ADAM_EPSILON,
    DEFAULT_BETA1,
    DEFAULT_BETA2,
    DEFAULT_L2_COEFF,
    DEFAULT_LEARNING_RATE,
)
from cyclemimo.exceptions import DomainError, ShapeError
from cyclemimo.nn.network import NeuralNet


@dataclass
class AdamState:
    learning_rate: float = DEFAULT_LEARNING_RATE
    beta1: float = DEFAULT_BETA1
    beta2: float = DEFAULT_BETA2
    epsilon: float = DEFAULT_ADAM_EPSILON
    l2_coeff: float = DEFAULT_L2_COEFF
    step_count: int = 0
    first_moment: list[np.ndarray] = field(default_factory=list)
    second_moment: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self) -> None:
        for name, beta in (("beta1", self.beta1), ("beta2", self.beta2)):
            if not 0.0 <= beta < 1.0:
                raise DomainError(f"Adam {name} must lie in [0, 1), got {beta}")


def adam_step(net: NeuralNet, state: AdamState) -> None:
    """One bias-corrected Adam update of every parameter of `net`; clears the gradients afterwards."""
    params = net.parameters()
    grads = net.gradients()

    if not state.first_moment:
        state.first_moment = [np.zeros_like(p) for p in params]
        state.second_moment = [np.zeros_like(p) for p in params]
    elif [m.shape for m in state.first_moment] != [p.shape for p in params]:
        raise ShapeError("Adam moments do not match the network parameters")

    state.step_count += 1
    bias_correction1 = 1.0 - state.beta1**state.step_count
    bias_correction2 = 1.0 - state.beta2**state.step_count

    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment, strict=True):
        g_total = g + state.l2_coeff * p
        m *= state.beta1
        m += (1.0 - state.beta1) * g_total
        v *= state.beta2
        v += (1.0 - state.beta2) * (g_total * g_total)
        p -= state.learning_rate * (m / bias_correction1) / (np.sqrt(v / bias_correction2) + state.epsilon)

    net.zero_grad()
