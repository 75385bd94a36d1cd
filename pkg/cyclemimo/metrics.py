"""Bit error rate and the hard-decision achievable rate."""

import math

import numpy as np
from scipy.special import entr

from cyclemimo.exceptions import DomainError, ShapeError


def ber(detected_bits: np.ndarray, true_bits: np.ndarray) -> float:
    detected_bits = np.asarray(detected_bits).ravel()
    true_bits = np.asarray(true_bits).ravel()
    if detected_bits.size != true_bits.size:
        raise ShapeError(f"Bit sequences differ in length: {detected_bits.size} vs {true_bits.size}")
    if detected_bits.size == 0:
        raise ShapeError("Cannot compute BER of empty bit sequences")
    return float(np.count_nonzero(detected_bits != true_bits) / detected_bits.size)


def binary_entropy(p: float) -> float:
    """H_b(p) in bits."""
    return float((entr(p) + entr(1.0 - p)) / math.log(2.0))


def achievable_rate(p: float, bits_per_symbol: int, streams: int, payload_fraction: float = 1.0) -> float:
    """
    Bits per channel use of `streams` parallel binary symmetric channels with crossover
    probability p; a BER above one half counts as its complement.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"BER must lie in [0, 1], got {p}")
    flipped = min(p, 1.0 - p)
    rate = payload_fraction * streams * bits_per_symbol * (1.0 - binary_entropy(flipped))
    return max(rate, 0.0)
