"""Transmit chain: bits, QPSK, SVD precoding, PA distortion, channel and noise."""

import csv
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Literal

import numpy as np

from cyclemimo.channel import ChannelRealization, NoiseSpec, awgn
from cyclemimo.constants import BITS_PER_QPSK_SYMBOL, CSV_FLOAT_FORMAT
from cyclemimo.exceptions import DomainError, FramingError, ShapeError
from cyclemimo.logging import get_logger

if TYPE_CHECKING:
    from cyclemimo.detectors.preprocessing import PreprocScales

logger = get_logger(__name__)

# Complex samples laid out [streams-or-antennas x symbols].
ComplexFrame = np.ndarray

PAModel = Literal["literal", "amplitude"]


@dataclass(frozen=True)
class PACoeffs:
    """Odd-order coefficients a_1, a_3, ..., a_{2N-1}."""

    coefficients: tuple[float, ...]
    model: PAModel = "literal"

    def __post_init__(self) -> None:
        if not self.coefficients:
            raise DomainError("PA polynomial needs at least one coefficient")
        if not all(math.isfinite(a) for a in self.coefficients):
            raise DomainError(f"PA coefficients must be finite, got {self.coefficients}")


@dataclass
class TransmissionBlock:
    s_pilot: ComplexFrame
    y_pilot: ComplexFrame
    s_payload: ComplexFrame
    y_payload: ComplexFrame
    bits: np.ndarray
    noise_variance: float
    channel: ChannelRealization
    scales: "PreprocScales | None" = None

    @property
    def pilots(self) -> int:
        return self.s_pilot.shape[1]

    @property
    def payload(self) -> int:
        return self.s_payload.shape[1]

    @property
    def streams(self) -> int:
        return self.s_pilot.shape[0]


def qpsk_modulate(bits: np.ndarray | Sequence[int], streams: int) -> ComplexFrame:
    """
    Gray-mapped unit-energy QPSK. Consecutive symbols fill all streams of one symbol
    instant before moving to the next instant.
    """
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if streams < 1 or bits.size % (BITS_PER_QPSK_SYMBOL * streams) != 0:
        raise FramingError(f"{bits.size} bits cannot be framed into QPSK symbols over {streams} streams")
    pairs = bits.reshape(-1, 2).astype(np.float64)
    symbols = ((1.0 - 2.0 * pairs[:, 0]) + 1j * (1.0 - 2.0 * pairs[:, 1])) / math.sqrt(2.0)
    return symbols.reshape(-1, streams).T.copy()


def qpsk_hard_bits(frame: ComplexFrame) -> np.ndarray:
    """Sign decisions in the symbol order used by `qpsk_modulate`; exact zeros decide bit 0."""
    frame = np.asarray(frame)
    symbols = frame.T.reshape(-1) if frame.ndim == 2 else frame.reshape(-1)
    bits = np.empty((symbols.size, 2), dtype=np.uint8)
    bits[:, 0] = symbols.real < 0
    bits[:, 1] = symbols.imag < 0
    return bits.reshape(-1)


def svd_precoder(ch: ChannelRealization, n_streams: int) -> np.ndarray:
    n_rx, n_tx = ch.shape
    if not 1 <= n_streams <= min(n_rx, n_tx):
        raise DomainError(f"Cannot precode {n_streams} streams over a {n_rx}x{n_tx} channel")
    return ch.V[:, :n_streams].copy()


def pa_apply(x: ComplexFrame, c: PACoeffs) -> ComplexFrame:
    x = np.asarray(x, dtype=np.complex128)
    out = np.zeros_like(x)
    for i, a in enumerate(c.coefficients):
        if c.model == "literal":
            out += a * x ** (2 * i + 1)
        else:
            out += a * x * np.abs(x) ** (2 * i)
    return out


def ebn0_to_noise_variance(ebn0_db: float, bits_per_symbol: int, symbol_energy: float) -> float:
    if bits_per_symbol < 1 or symbol_energy <= 0:
        raise DomainError(f"Invalid modulation parameters m={bits_per_symbol}, Es={symbol_energy}")
    return symbol_energy / (bits_per_symbol * 10.0 ** (ebn0_db / 10.0))


def transmit_block(
    S: ComplexFrame,
    ch: ChannelRealization,
    F: np.ndarray,
    pa: PACoeffs | None,
    noise_variance: float,
    rng: np.random.Generator,
    pilots: int,
) -> TransmissionBlock:
    """Y = H g(F S) + N with the first `pilots` symbol columns forming the pilot part."""
    S = np.asarray(S, dtype=np.complex128)
    n_rx, n_tx = ch.shape
    if F.shape[0] != n_tx or F.shape[1] != S.shape[0]:
        raise ShapeError(f"Precoder {F.shape} does not map {S.shape[0]} streams onto {n_tx} antennas")
    if not 0 < pilots < S.shape[1]:
        raise ShapeError(f"Pilot count {pilots} must lie strictly inside the block of {S.shape[1]} symbols")

    x = F @ S
    if pa is not None:
        x = pa_apply(x, pa)
    Y = ch.H @ x + awgn(n_rx, S.shape[1], NoiseSpec(noise_variance), rng)

    return TransmissionBlock(
        s_pilot=S[:, :pilots],
        y_pilot=Y[:, :pilots],
        s_payload=S[:, pilots:],
        y_payload=Y[:, pilots:],
        bits=qpsk_hard_bits(S[:, pilots:]),
        noise_variance=noise_variance,
        channel=ch,
    )


def generate_block(
    ch: ChannelRealization,
    streams: int,
    block_length: int,
    pilots: int,
    pa: PACoeffs | None,
    noise_variance: float,
    bits_rng: np.random.Generator,
    noise_rng: np.random.Generator,
) -> TransmissionBlock:
    """Random QPSK pilots and payload pushed through `transmit_block` with an SVD precoder."""
    bits = bits_rng.integers(0, 2, size=BITS_PER_QPSK_SYMBOL * streams * block_length, dtype=np.uint8)
    S = qpsk_modulate(bits, streams)
    F = svd_precoder(ch, streams)
    return transmit_block(S, ch, F, pa, noise_variance, noise_rng, pilots)


def dump_block_csv(block: TransmissionBlock, path: Path) -> None:
    """Signals section of the audit dump: role, stream, symbol, re, im."""
    frames = {"S_P": block.s_pilot, "Y_P": block.y_pilot, "S_D": block.s_payload, "Y_D": block.y_payload}
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["role", "stream", "symbol", "re", "im"])
        for role, frame in frames.items():
            for (stream, symbol), value in np.ndenumerate(frame):
                writer.writerow(
                    [role, stream, symbol, CSV_FLOAT_FORMAT.format(value.real), CSV_FLOAT_FORMAT.format(value.imag)]
                )
