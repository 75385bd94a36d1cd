import sys
from pathlib import Path
from typing import Any

import click

from cyclemimo import config, exceptions
from cyclemimo.constants import CYCLEMIMO_ENV_PREFIX
from cyclemimo.logging import configure_logging, get_logger
from cyclemimo.models import DetectorKind
from cyclemimo.runner import run_and_write

logger = get_logger(__name__)


def _handle_critical_error(error_instance: Exception, log_message: str) -> None:
    """Logs a critical error and exits the application."""
    logger.critical(log_message, error=str(error_instance), exc_info=False)
    sys.exit(1)


def build_overrides(
    ebn0: str | None = None,
    blocks: int | None = None,
    pilots: int | None = None,
    detectors: str | None = None,
    pa: str | None = None,
    channel: str | None = None,
    doppler: float | None = None,
    seed: int | None = None,
    out: Path | None = None,
    curves_out: Path | None = None,
    channel_dump: Path | None = None,
) -> dict[str, Any]:
    """Translate command-line flags into a nested config override mapping."""
    overrides: dict[str, Any] = {}

    def put(section: str, key: str, value: Any) -> None:
        overrides.setdefault(section, {})[key] = value

    if ebn0 is not None:
        put("sweep", "ebn0_db", config.parse_ebn0_spec(ebn0))
    if blocks is not None:
        put("sweep", "blocks_per_point", blocks)
    if pilots is not None:
        put("system", "pilots", pilots)
    if detectors is not None:
        names = [name.strip() for name in detectors.split(",") if name.strip()]
        known = {kind.value for kind in DetectorKind}
        unknown = [name for name in names if name not in known]
        if unknown:
            raise exceptions.ConfigError(f"Unknown detector(s) {unknown}, expected any of {sorted(known)}")
        put("sweep", "detectors", names)
    if pa is not None:
        put("nonlinearity", "enabled", pa == "on")
    if channel is not None:
        overrides.setdefault("channel", {}).update(config.parse_channel_spec(channel))
    if doppler is not None:
        put("channel", "doppler_hz", doppler)
    if seed is not None:
        put("sweep", "seed", seed)
    if out is not None:
        put("output", "path", str(out))
    if curves_out is not None:
        put("output", "curves_path", str(curves_out))
    if channel_dump is not None:
        put("output", "channel_dump_path", str(channel_dump))
    return overrides


@click.group(context_settings=dict(auto_envvar_prefix=CYCLEMIMO_ENV_PREFIX))
def cli():
    """
    Simulate semi-blind MIMO detectors over fading channels and write BER/rate curves.
    """
    pass


@cli.command()
@click.option(
    "--config",
    "config_file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Path to the YAML configuration file.",
)
@click.option(
    "--profile",
    type=click.Choice(["paper", "full", "smoke"]),
    default="paper",
    show_default=True,
    help="Preset: paper-scale 64x8 (full is an alias) or the quick 8x8 smoke setup.",
)
@click.option("--ebn0", default=None, help="Eb/N0 points in dB, as start:step:stop or a comma-separated list.")
@click.option("--blocks", type=click.IntRange(min=1), default=None, help="Blocks per Eb/N0 point.")
@click.option(
    "--pilots",
    type=click.IntRange(min=1),
    default=None,
    help="Pilot symbols per block; payload fills the rest.",
)
@click.option("--detectors", default=None, help="Comma-separated detectors, e.g. lmmse,dnn,cyclednn,cyclegan.")
@click.option("--pa", type=click.Choice(["on", "off"]), default=None, help="Power amplifier nonlinearity.")
@click.option("--channel", default=None, help="rayleigh or rician:<K>db.")
@click.option("--doppler", type=float, default=None, help="Maximum Doppler shift in Hz.")
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Master seed.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Results CSV path.")
@click.option(
    "--curves-out",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Optional per-curve aggregate CSV path.",
)
@click.option(
    "--channel-dump",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Optional CSV dump of the generated channel matrices.",
)
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"], case_sensitive=False),
    default="INFO",
    show_default=True,
    help="Set the logging level.",
)
def run(
    config_file: Path | None,
    profile: str,
    ebn0: str | None,
    blocks: int | None,
    pilots: int | None,
    detectors: str | None,
    pa: str | None,
    channel: str | None,
    doppler: float | None,
    seed: int | None,
    out: Path | None,
    curves_out: Path | None,
    channel_dump: Path | None,
    log_level: str,
):
    """Run an Eb/N0 sweep and write per-block metrics."""
    configure_logging(log_level)

    try:
        overrides = build_overrides(
            ebn0=ebn0,
            blocks=blocks,
            pilots=pilots,
            detectors=detectors,
            pa=pa,
            channel=channel,
            doppler=doppler,
            seed=seed,
            out=out,
            curves_out=curves_out,
            channel_dump=channel_dump,
        )
        experiment_config = config.parse_config(config_file, overrides, profile=profile)  # type: ignore[arg-type]
    except exceptions.ConfigError as e:
        logger.critical("Configuration error", error=str(e))
        sys.exit(1)

    try:
        stats = run_and_write(experiment_config)
    except exceptions.ExperimentError as e:
        _handle_critical_error(e, log_message="Experiment aborted")
        return
    except exceptions.CycleMimoError as e:
        _handle_critical_error(e, log_message="Simulation error")
        return
    except Exception as e:
        _handle_critical_error(e, log_message="An unexpected error occurred during the experiment")
        return

    logger.info(
        "Experiment finished successfully",
        points=stats.points,
        blocks=stats.blocks,
        records=stats.records,
        output=str(experiment_config.output.path),
    )


if __name__ == "__main__":
    cli()
