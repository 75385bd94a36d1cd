"""One detector's state across the successive blocks of a single Eb/N0 point."""

import time
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from cyclemimo.constants import QPSK_SYMBOL_ENERGY
from cyclemimo.detectors.ensemble import DetectorEnsemble, build_ensemble
from cyclemimo.detectors.lmmse import lmmse_detect
from cyclemimo.detectors.training import PilotPairs, detect, train_block
from cyclemimo.link import ComplexFrame, TransmissionBlock, qpsk_hard_bits
from cyclemimo.logging import get_logger
from cyclemimo.models import DetectorKind, TrainReport

if TYPE_CHECKING:
    from cyclemimo.config import NetworkConfig, TrainingConfig

logger = get_logger(__name__)


@dataclass(frozen=True)
class BlockOutcome:
    kind: DetectorKind
    estimate: ComplexFrame
    bits: np.ndarray
    report: TrainReport | None
    wallclock_s: float


class DetectorSession:
    """
    Warm-start chain for one detector: the ensemble and the pilots of block l carry into block
    l + 1. A new session starts from freshly initialized networks.
    """

    def __init__(
        self,
        kind: DetectorKind,
        streams: int,
        network: "NetworkConfig",
        training: "TrainingConfig",
        init_rng: np.random.Generator,
    ):
        self.kind = kind
        self.streams = streams
        self.training = training
        self.ensemble: DetectorEnsemble | None = None
        self.previous_pilots: PilotPairs | None = None
        if kind.is_neural:
            self.ensemble = build_ensemble(
                streams,
                init_rng,
                generator_hidden=tuple(network.generator_hidden),
                discriminator_hidden=tuple(network.discriminator_hidden),
                slope=network.leaky_slope,
                drop_rate=network.dropout_rate,
                pilot_weights=training.pilot_weights,
                data_weights=training.data_weights,
            )

    def process_block(self, block: TransmissionBlock, rng: np.random.Generator) -> BlockOutcome:
        started = time.perf_counter()
        report: TrainReport | None = None

        if self.ensemble is None:
            estimate = lmmse_detect(
                block.y_payload, block.channel, block.noise_variance, QPSK_SYMBOL_ENERGY, n_streams=self.streams
            )
            bits = qpsk_hard_bits(estimate)
        else:
            current = PilotPairs(s=block.s_pilot, y=block.y_pilot)
            report = train_block(
                self.kind, self.ensemble, current, self.previous_pilots, block.y_payload, self.training, rng
            )
            estimate, bits = detect(self.ensemble, block.y_payload)
            self.previous_pilots = current
            logger.debug(
                "Trained detector on block",
                detector=str(self.kind),
                block_index=block.channel.block_index,
                epochs=report.epochs_run,
                val_ber=report.best_val_ber,
                used_previous_pilots=report.used_previous_pilots,
                refreshes=report.pseudo_label_refreshes,
            )

        return BlockOutcome(
            kind=self.kind,
            estimate=estimate,
            bits=bits,
            report=report,
            wallclock_s=time.perf_counter() - started,
        )
