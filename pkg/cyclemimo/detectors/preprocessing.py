"""Flattening, max-abs normalization and noise augmentation of paired signal sets."""

from dataclasses import dataclass

import numpy as np

from cyclemimo.exceptions import FittingError, FramingError, ShapeError
from cyclemimo.link import ComplexFrame


@dataclass(frozen=True)
class PreprocScales:
    s_scale: np.ndarray  # per-feature maxima of the transmitted domain
    y_scale: np.ndarray  # per-feature maxima of the received domain


def flatten(frame: ComplexFrame) -> np.ndarray:
    """[streams x symbols] complex -> [symbols x 2*streams] real, re/im interleaved per stream."""
    frame = np.asarray(frame)
    if frame.ndim != 2:
        raise ShapeError(f"Expected a 2-D frame, got shape {frame.shape}")
    rows = np.empty((frame.shape[1], 2 * frame.shape[0]), dtype=np.float64)
    rows[:, 0::2] = frame.real.T
    rows[:, 1::2] = frame.imag.T
    return rows


def unflatten(rows: np.ndarray) -> ComplexFrame:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] % 2 != 0:
        raise FramingError(f"Cannot unflatten rows of shape {rows.shape} into complex samples")
    return (rows[:, 0::2] + 1j * rows[:, 1::2]).T.copy()


def fit_scales(s_flat: np.ndarray, y_flat: np.ndarray, shared: bool = False) -> PreprocScales:
    """
    Per-feature maximum absolute value of each domain. With `shared`, the received
    domain is divided by the transmitted maxima instead of its own.
    """
    if s_flat.shape[0] < 1 or y_flat.shape[0] < 1:
        raise FittingError("Cannot fit normalization scales on an empty set")
    if shared and y_flat.shape[1] != s_flat.shape[1]:
        raise FittingError("Shared scaling needs both domains to have the same width")
    s_scale = np.max(np.abs(s_flat), axis=0)
    y_scale = s_scale.copy() if shared else np.max(np.abs(y_flat), axis=0)
    for name, scale in (("transmitted", s_scale), ("received", y_scale)):
        zero = np.flatnonzero(scale <= 0)
        if zero.size:
            raise FittingError(f"Zero maximum in {name} feature(s) {zero.tolist()}")
    return PreprocScales(s_scale=s_scale, y_scale=y_scale)


def normalize(x: np.ndarray, scale: np.ndarray) -> np.ndarray:
    if x.shape[-1] != scale.shape[0]:
        raise ShapeError(f"Rows of width {x.shape[-1]} do not match {scale.shape[0]} scales")
    return x / scale


def denormalize(x: np.ndarray, scale: np.ndarray) -> np.ndarray:
    if x.shape[-1] != scale.shape[0]:
        raise ShapeError(f"Rows of width {x.shape[-1]} do not match {scale.shape[0]} scales")
    return x * scale


def augment(
    s: np.ndarray,
    y: np.ndarray,
    factor: int,
    noise_std: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Originals first, then `factor - 1` copies with independent Gaussian noise on both sides."""
    if factor < 1:
        raise ShapeError(f"Augmentation factor must be at least 1, got {factor}")
    if s.shape[0] != y.shape[0]:
        raise ShapeError(f"Paired sets differ in length: {s.shape[0]} vs {y.shape[0]}")
    s_parts = [s]
    y_parts = [y]
    for _ in range(factor - 1):
        s_parts.append(s + noise_std * rng.standard_normal(s.shape))
        y_parts.append(y + noise_std * rng.standard_normal(y.shape))
    return np.vstack(s_parts), np.vstack(y_parts)


def hard_bits_from_rows(rows: np.ndarray) -> np.ndarray:
    """QPSK sign decisions on flattened rows, in the same bit order as `qpsk_hard_bits`."""
    return (np.asarray(rows) < 0).astype(np.uint8).reshape(-1)
