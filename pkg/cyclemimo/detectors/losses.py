"""
Least-squares adversarial and l1 consistency objectives.

Discriminators score concatenated pairs: D_s2y sees [s, y] and D_y2s sees [y, s]. Real pairs
target +1 and generated pairs target -1; generators push the score of their pairs towards 0.
"""

from typing import TYPE_CHECKING

import numpy as np

from cyclemimo.models import LossWeights
from cyclemimo.nn import NeuralNet, Trace

if TYPE_CHECKING:
    from cyclemimo.detectors.ensemble import DetectorEnsemble

REAL_TARGET = 1.0
FAKE_TARGET = -1.0


def least_squares_d_terms(
    real_scores: np.ndarray,
    fake_scores: np.ndarray,
    inverted: bool = False,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Batch-mean discriminator loss and its gradients with respect to both score columns."""
    real_target, fake_target = (FAKE_TARGET, REAL_TARGET) if inverted else (REAL_TARGET, FAKE_TARGET)
    n = real_scores.shape[0]
    real_residual = real_scores - real_target
    fake_residual = fake_scores - fake_target
    loss = float(np.mean(real_residual**2) + np.mean(fake_residual**2))
    return loss, 2.0 * real_residual / n, 2.0 * fake_residual / n


def l1_term(residual: np.ndarray) -> tuple[float, np.ndarray]:
    """Batch mean of per-row l1 norms, with subgradient 0 at exact zeros."""
    n = residual.shape[0]
    return float(np.abs(residual).sum() / n), np.sign(residual) / n


def d_loss(discriminator: NeuralNet, real_pair: np.ndarray, fake_pair: np.ndarray, inverted: bool = False) -> float:
    real_scores = discriminator.forward(real_pair, "eval")
    fake_scores = discriminator.forward(fake_pair, "eval")
    loss, _, _ = least_squares_d_terms(real_scores, fake_scores, inverted)
    return loss


def discriminator_pass(
    discriminator: NeuralNet,
    condition: np.ndarray,
    real: np.ndarray,
    fake: np.ndarray,
    inverted: bool,
) -> float:
    """Accumulate discriminator gradients for one batch of real and generated pairs."""
    real_scores, real_trace = discriminator.forward_traced(np.hstack([condition, real]))
    fake_scores, fake_trace = discriminator.forward_traced(np.hstack([condition, fake]))
    loss, grad_real, grad_fake = least_squares_d_terms(real_scores, fake_scores, inverted)
    discriminator.backward(grad_real, real_trace)
    discriminator.backward(grad_fake, fake_trace)
    return loss


def _apply(net: NeuralNet, x: np.ndarray, backprop: bool) -> tuple[np.ndarray, Trace | None]:
    if backprop:
        return net.forward_traced(x, "train")
    return net.forward(x, "eval"), None


def _inverse_only_pass(g_y2s: NeuralNet, s: np.ndarray, y: np.ndarray, beta: float, backprop: bool) -> float:
    fake_s, trace = _apply(g_y2s, y, backprop)
    loss, grad = l1_term(fake_s - s)
    if trace is not None:
        g_y2s.backward(beta * grad, trace)
    return beta * loss


def generator_pass(
    ensemble: "DetectorEnsemble",
    s: np.ndarray,
    y: np.ndarray,
    weights: LossWeights,
    *,
    adversarial: bool = True,
    backprop: bool = False,
) -> float:
    """
    Joint generator objective on one batch. With `backprop`, gradients are accumulated into
    both generators (discriminator gradients produced on the way are discarded). The forward
    generator is not run at all when no active term depends on it.
    """
    n = s.shape[0]
    g_s2y, g_y2s = ensemble.g_s2y, ensemble.g_y2s
    if not (adversarial or weights.alpha or weights.gamma or weights.delta):
        return _inverse_only_pass(g_y2s, s, y, weights.beta, backprop)

    fake_y, fake_y_trace = _apply(g_s2y, s, backprop)
    fake_s, fake_s_trace = _apply(g_y2s, y, backprop)
    grad_fake_y = np.zeros_like(fake_y)
    grad_fake_s = np.zeros_like(fake_s)
    total = 0.0

    if adversarial:
        for disc, cond, fake, grad in (
            (ensemble.d_s2y, s, fake_y, grad_fake_y),
            (ensemble.d_y2s, y, fake_s, grad_fake_s),
        ):
            scores, trace = _apply(disc, np.hstack([cond, fake]), backprop)
            total += float(np.mean(scores**2))
            if trace is not None:
                input_grad = disc.backward(2.0 * scores / n, trace)
                grad += input_grad[:, cond.shape[1] :]
                disc.zero_grad()

    if weights.alpha:
        loss, grad = l1_term(fake_y - y)
        total += weights.alpha * loss
        grad_fake_y += weights.alpha * grad
    if weights.beta:
        loss, grad = l1_term(fake_s - s)
        total += weights.beta * loss
        grad_fake_s += weights.beta * grad
    if weights.gamma:
        cycled_s, trace = _apply(g_y2s, fake_y, backprop)
        loss, grad = l1_term(cycled_s - s)
        total += weights.gamma * loss
        if trace is not None:
            grad_fake_y += g_y2s.backward(weights.gamma * grad, trace)
    if weights.delta:
        cycled_y, trace = _apply(g_s2y, fake_s, backprop)
        loss, grad = l1_term(cycled_y - y)
        total += weights.delta * loss
        if trace is not None:
            grad_fake_s += g_s2y.backward(weights.delta * grad, trace)

    if fake_y_trace is not None and fake_s_trace is not None:
        g_s2y.backward(grad_fake_y, fake_y_trace)
        g_y2s.backward(grad_fake_s, fake_s_trace)
    return total


def g_loss(
    ensemble: "DetectorEnsemble",
    s_batch: np.ndarray,
    y_batch: np.ndarray,
    weights: LossWeights,
    adversarial: bool = True,
) -> float:
    return generator_pass(ensemble, s_batch, y_batch, weights, adversarial=adversarial, backprop=False)
