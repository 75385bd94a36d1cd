"""Non-blind per-stream LMMSE on the SVD-diagonalized channel."""

import numpy as np

from cyclemimo.channel import ChannelRealization
from cyclemimo.link import ComplexFrame


def lmmse_detect(
    y_payload: ComplexFrame,
    ch: ChannelRealization,
    noise_variance: float,
    symbol_energy: float,
    n_streams: int | None = None,
) -> ComplexFrame:
    n_streams = n_streams or min(ch.shape)
    rotated = ch.U[:, :n_streams].conj().T @ y_payload
    sigma = ch.singular_values[:n_streams]
    denom = sigma**2 * symbol_energy + noise_variance
    gain = np.divide(sigma * symbol_energy, denom, out=np.zeros_like(sigma), where=denom > 0)
    return gain[:, None] * rotated
