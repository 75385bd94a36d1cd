"""One Eb/N0 point of the sweep: a channel sequence, one session per detector, block after block."""

from pathlib import Path

from cyclemimo.channel import (
    ChannelRealization,
    FadingConfig,
    dump_channels_csv,
    gen_rayleigh_sequence,
    gen_rician_sequence,
)
from cyclemimo.config import ExperimentConfig
from cyclemimo.constants import BITS_PER_QPSK_SYMBOL, QPSK_SYMBOL_ENERGY
from cyclemimo.detectors import DetectorSession
from cyclemimo.exceptions import CycleMimoError, ExperimentError
from cyclemimo.link import ebn0_to_noise_variance, generate_block
from cyclemimo.logging import get_logger
from cyclemimo.metrics import achievable_rate, ber
from cyclemimo.models import MetricsRecord
from cyclemimo.pipeline.types import PointTask, RecordItem
from cyclemimo.seeding import SHARED_SLOT, Purpose, derive_rng, derive_seed, detector_slot

logger = get_logger(__name__)


def channel_dump_path(base: Path, ebn0_index: int, points: int) -> Path:
    """The configured path for a single-point sweep, else one file per point."""
    if points == 1:
        return base
    return base.with_name(f"{base.stem}-ebn0_{ebn0_index}{base.suffix}")


class PointSimulation:
    def __init__(self, config: ExperimentConfig, task: PointTask):
        self.config = config
        self.task = task
        system, channel = config.system, config.channel
        self.seed = config.sweep.seed
        self.noise_variance = ebn0_to_noise_variance(task.ebn0_db, BITS_PER_QPSK_SYMBOL, QPSK_SYMBOL_ENERGY)
        self.payload_fraction = 1.0 if config.sweep.rate_full_frame else system.payload / system.block_length
        self.pa = config.nonlinearity.coeffs()

        fading = FadingConfig(
            n_rx=system.rx_antennas,
            n_tx=system.tx_antennas,
            blocks=config.sweep.blocks_per_point,
            doppler_hz=channel.doppler_hz,
            block_period_s=system.block_period_s,
            oscillators=channel.oscillators,
        )
        channel_seed = derive_seed(self.seed, task.ebn0_index, Purpose.CHANNEL)
        self.channels: list[ChannelRealization]
        if channel.kind == "rician":
            self.channels = gen_rician_sequence(fading, channel.rician_factor, channel_seed)
        else:
            self.channels = gen_rayleigh_sequence(fading, channel_seed)

        if config.output.channel_dump_path is not None:
            path = channel_dump_path(config.output.channel_dump_path, task.ebn0_index, len(config.sweep.ebn0_db))
            dump_channels_csv(self.channels, path)

        self.sessions = [
            DetectorSession(
                kind,
                system.streams,
                config.network,
                config.training,
                derive_rng(self.seed, task.ebn0_index, 0, detector_slot(position), Purpose.INIT),
            )
            for position, kind in enumerate(config.sweep.detectors)
        ]

    @property
    def blocks(self) -> int:
        return len(self.channels)

    def run_block(self, block_index: int) -> list[RecordItem]:
        system = self.config.system
        ebn0_index, ebn0_db = self.task.ebn0_index, self.task.ebn0_db
        block = generate_block(
            self.channels[block_index],
            system.streams,
            system.block_length,
            system.pilots,
            self.pa,
            self.noise_variance,
            derive_rng(self.seed, ebn0_index, block_index, SHARED_SLOT, Purpose.BITS),
            derive_rng(self.seed, ebn0_index, block_index, SHARED_SLOT, Purpose.NOISE),
        )

        items: list[RecordItem] = []
        for position, session in enumerate(self.sessions):
            train_rng = derive_rng(self.seed, ebn0_index, block_index, detector_slot(position), Purpose.TRAIN)
            try:
                outcome = session.process_block(block, train_rng)
            except CycleMimoError as e:
                logger.error(
                    "Detector failed on block",
                    ebn0_db=ebn0_db,
                    block_index=block_index,
                    detector=str(session.kind),
                    error_type=type(e).__name__,
                    error=str(e),
                )
                raise ExperimentError(
                    f"{session.kind} failed at Eb/N0 {ebn0_db} dB, block {block_index}: {e}",
                    ebn0_db=ebn0_db,
                    block_index=block_index,
                    detector=str(session.kind),
                ) from e

            error_rate = ber(outcome.bits, block.bits)
            report = outcome.report
            record = MetricsRecord(
                ebn0_db=ebn0_db,
                block_index=block_index,
                detector=session.kind,
                ber=error_rate,
                achievable_rate_bits_per_use=achievable_rate(
                    error_rate, BITS_PER_QPSK_SYMBOL, system.streams, self.payload_fraction
                ),
                epochs_run=report.epochs_run if report else 0,
                used_previous_pilots=report.used_previous_pilots if report else False,
                pseudo_label_refreshes=report.pseudo_label_refreshes if report else 0,
                wallclock_s=outcome.wallclock_s if self.config.output.record_wallclock else 0.0,
                seed=self.seed,
            )
            items.append(RecordItem(ebn0_index, block_index, position, record))

        logger.info(
            "Finished block",
            ebn0_db=ebn0_db,
            block_index=block_index,
            bers={item.record.detector.value: round(item.record.ber, 6) for item in items},
        )
        return items
