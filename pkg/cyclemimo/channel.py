"""
Block-fading MIMO channels built from per-path Jakes sum-of-sinusoids processes.

Every (rx, tx) path is an independent Jakes process with its own random initial time and
random oscillator phases; one channel matrix is sampled per block at t0 + l * T_block.
"""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from cyclemimo.constants import (
    CSV_FLOAT_FORMAT,
    DEFAULT_OSCILLATORS,
    JAKES_T0_WINDOW_CYCLES,
    JAKES_T0_WINDOW_STATIC_S,
)
from cyclemimo.exceptions import DomainError
from cyclemimo.logging import get_logger

logger = get_logger(__name__)

_SCATTER_STREAM = 0
_LOS_STREAM = 1
_PHASE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class JakesParams:
    channel_power: float  # E0, amplitude scale
    oscillators: int  # N0
    max_doppler_hz: float
    sample_period_s: float
    initial_time_s: float
    phases: np.ndarray  # phi_1 .. phi_N0
    phase_n: float  # phi_N

    def __post_init__(self) -> None:
        if self.oscillators < 1:
            raise DomainError(f"Jakes model needs at least one oscillator, got {self.oscillators}")
        if self.max_doppler_hz < 0:
            raise DomainError(f"Maximum Doppler shift must be non-negative, got {self.max_doppler_hz}")
        if np.shape(self.phases) != (self.oscillators,):
            raise DomainError(f"Expected {self.oscillators} oscillator phases, got shape {np.shape(self.phases)}")

    @property
    def omega_d(self) -> float:
        return 2.0 * math.pi * self.max_doppler_hz

    @property
    def prefactor(self) -> float:
        return self.channel_power / math.sqrt(2 * self.oscillators + 1)


@dataclass(frozen=True)
class FadingConfig:
    n_rx: int
    n_tx: int
    blocks: int
    doppler_hz: float
    block_period_s: float
    oscillators: int = DEFAULT_OSCILLATORS

    def __post_init__(self) -> None:
        if self.blocks < 1:
            raise DomainError(f"Channel sequence needs at least one block, got {self.blocks}")
        if self.n_rx < 1 or self.n_tx < 1:
            raise DomainError(f"Antenna counts must be positive, got {self.n_rx}x{self.n_tx}")


@dataclass(frozen=True)
class ChannelMeta:
    doppler_hz: float
    rician_factor: float  # linear, 0 means Rayleigh
    seed: int


@dataclass(frozen=True)
class ChannelRealization:
    H: np.ndarray
    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray
    block_index: int
    meta: ChannelMeta = field(repr=False)

    @classmethod
    def from_matrix(cls, H: np.ndarray, block_index: int, meta: ChannelMeta) -> "ChannelRealization":
        """Attach an SVD whose right singular vectors have phase-fixed columns.

        Each column of V is rotated so its first nonzero entry is real and positive,
        and the matching column of U gets the same rotation. Slowly varying channels
        then keep a slowly varying effective channel H·V from block to block.
        """
        H = np.asarray(H, dtype=np.complex128)
        U, s, Vh = np.linalg.svd(H, full_matrices=True)
        V = Vh.conj().T.copy()
        U = U.copy()
        for col in range(V.shape[1]):
            nonzero = np.flatnonzero(np.abs(V[:, col]) > _PHASE_TOLERANCE)
            if not nonzero.size:
                continue
            lead = V[nonzero[0], col]
            rotation = np.conj(lead) / np.abs(lead)
            V[:, col] *= rotation
            if col < U.shape[1]:
                U[:, col] *= rotation
        return cls(H=H, U=U, singular_values=s, V=V, block_index=block_index, meta=meta)

    @property
    def shape(self) -> tuple[int, int]:
        return self.H.shape  # type: ignore[return-value]


@dataclass(frozen=True)
class NoiseSpec:
    variance: float

    def __post_init__(self) -> None:
        if self.variance < 0:
            raise DomainError(f"Noise variance must be non-negative, got {self.variance}")


def oscillator_frequencies(omega_d: float, oscillators: int) -> np.ndarray:
    n = np.arange(1, oscillators + 1)
    return omega_d * np.cos(2.0 * math.pi * n / (4 * oscillators + 2))


def _sum_of_sinusoids(
    t: np.ndarray,
    omega_d: float,
    phases: np.ndarray,
    phase_n: np.ndarray,
) -> np.ndarray:
    """
    In-phase plus quadrature Jakes components at times `t` (shape [..., T]) for paths whose
    oscillator phases have shape [..., N0] and whose extra phase has shape [...].
    """
    omega_n = oscillator_frequencies(omega_d, phases.shape[-1])
    carriers = np.cos(t[..., :, None] * omega_n)
    doppler = math.sqrt(2.0) * np.cos(omega_d * t)
    h_i = 2.0 * np.einsum("...tn,...n->...t", carriers, np.cos(phases)) + np.cos(phase_n)[..., None] * doppler
    h_q = 2.0 * np.einsum("...tn,...n->...t", carriers, np.sin(phases)) + np.sin(phase_n)[..., None] * doppler
    return h_i + 1j * h_q


def jakes_sample(p: JakesParams, k: int) -> complex:
    t = np.array([p.initial_time_s + k * p.sample_period_s])
    h = _sum_of_sinusoids(t, p.omega_d, np.asarray(p.phases, dtype=np.float64), np.asarray(p.phase_n))
    return complex(p.prefactor * h[0])


def _mean_squared_cosine(omega: np.ndarray | float, window: float) -> np.ndarray:
    """Average of cos^2(omega * t) for t uniform over [0, window)."""
    arg = 2.0 * np.asarray(omega, dtype=np.float64) * window
    return 0.5 + 0.5 * np.sinc(arg / math.pi)


def t0_window(doppler_hz: float) -> float:
    if doppler_hz > 0:
        return JAKES_T0_WINDOW_CYCLES / doppler_hz
    return JAKES_T0_WINDOW_STATIC_S


def unit_power_amplitude(oscillators: int, omega_d: float, window: float) -> float:
    """E0 giving E|h|^2 = 1 when t0 is uniform over `window` and all phases are uniform."""
    c_n = _mean_squared_cosine(oscillator_frequencies(omega_d, oscillators), window)
    c_d = _mean_squared_cosine(omega_d, window)
    expected_power = (4.0 * float(np.sum(c_n)) + 2.0 * float(c_d)) / (2 * oscillators + 1)
    return 1.0 / math.sqrt(expected_power)


def _rayleigh_gains(cfg: FadingConfig, seed: int) -> np.ndarray:
    """Unit-power path gains of shape [blocks, n_rx, n_tx]."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_SCATTER_STREAM,)))
    paths = (cfg.n_rx, cfg.n_tx)
    window = t0_window(cfg.doppler_hz)
    t0 = rng.uniform(0.0, window, size=paths)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=(*paths, cfg.oscillators))
    phase_n = rng.uniform(0.0, 2.0 * math.pi, size=paths)

    omega_d = 2.0 * math.pi * cfg.doppler_hz
    amplitude = unit_power_amplitude(cfg.oscillators, omega_d, window)
    t = t0[..., None] + np.arange(cfg.blocks) * cfg.block_period_s
    gains = amplitude / math.sqrt(2 * cfg.oscillators + 1) * _sum_of_sinusoids(t, omega_d, phases, phase_n)
    return np.moveaxis(gains, -1, 0)


def _line_of_sight(n_rx: int, n_tx: int, seed: int) -> np.ndarray:
    """Rank-one unit-modulus matrix from two steering-like vectors with random phase ramps."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_LOS_STREAM,)))
    offset_r, ramp_r, offset_t, ramp_t = rng.uniform(0.0, 2.0 * math.pi, size=4)
    a_r = np.exp(1j * (offset_r + ramp_r * np.arange(n_rx)))
    a_t = np.exp(1j * (offset_t + ramp_t * np.arange(n_tx)))
    return np.outer(a_r, a_t)


def gen_rayleigh_sequence(cfg: FadingConfig, seed: int) -> list[ChannelRealization]:
    gains = _rayleigh_gains(cfg, seed)
    meta = ChannelMeta(doppler_hz=cfg.doppler_hz, rician_factor=0.0, seed=seed)
    logger.debug("Generated Rayleigh channel sequence", blocks=cfg.blocks, n_rx=cfg.n_rx, n_tx=cfg.n_tx, seed=seed)
    return [ChannelRealization.from_matrix(gains[block], block, meta) for block in range(cfg.blocks)]


def gen_rician_sequence(cfg: FadingConfig, rician_factor: float, seed: int) -> list[ChannelRealization]:
    if rician_factor < 0:
        raise DomainError(f"Rician factor must be non-negative, got {rician_factor}")
    scatter = _rayleigh_gains(cfg, seed)
    los = _line_of_sight(cfg.n_rx, cfg.n_tx, seed)
    los_weight = math.sqrt(rician_factor / (rician_factor + 1.0))
    scatter_weight = math.sqrt(1.0 / (rician_factor + 1.0))
    meta = ChannelMeta(doppler_hz=cfg.doppler_hz, rician_factor=rician_factor, seed=seed)
    logger.debug("Generated Rician channel sequence", blocks=cfg.blocks, rician_factor=rician_factor, seed=seed)
    return [
        ChannelRealization.from_matrix(los_weight * los + scatter_weight * scatter[block], block, meta)
        for block in range(cfg.blocks)
    ]


def awgn(rows: int, cols: int, spec: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    """Circularly symmetric complex Gaussian noise with total per-entry variance `spec.variance`."""
    scale = math.sqrt(spec.variance / 2.0)
    return scale * (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols)))


def dump_channels_csv(channels: list[ChannelRealization], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["block", "rx", "tx", "re", "im"])
        for ch in channels:
            for (rx, tx), h in np.ndenumerate(ch.H):
                writer.writerow(
                    [ch.block_index, rx, tx, CSV_FLOAT_FORMAT.format(h.real), CSV_FLOAT_FORMAT.format(h.imag)]
                )
    logger.info("Wrote channel dump", path=str(path), blocks=len(channels))
