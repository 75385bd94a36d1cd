import copy
import math
from pathlib import Path
from typing import Annotated, Any, Literal

import numpy as np
import yaml
from pydantic import BaseModel, Field, ValidationError
from pydantic.functional_validators import BeforeValidator

from cyclemimo.constants import (
    DEFAULT_ADAM_EPSILON,
    DEFAULT_AUGMENT_NOISE_STD,
    DEFAULT_BATCH_SIZE,
    DEFAULT_BETA1,
    DEFAULT_BETA2,
    DEFAULT_BLOCK_LENGTH,
    DEFAULT_BLOCKS_PER_POINT,
    DEFAULT_DISCRIMINATOR_HIDDEN,
    DEFAULT_DOPPLER_HZ,
    DEFAULT_DROPOUT_RATE,
    DEFAULT_EBN0_DB,
    DEFAULT_EPOCH_CAP,
    DEFAULT_GENERATOR_HIDDEN,
    DEFAULT_L2_COEFF,
    DEFAULT_LABEL_INVERT_PROB,
    DEFAULT_LEAKY_SLOPE,
    DEFAULT_LEARNING_RATE,
    DEFAULT_OSCILLATORS,
    DEFAULT_OUTPUT_PATH,
    DEFAULT_PA_COEFFICIENTS,
    DEFAULT_PATIENCE,
    DEFAULT_PAYLOAD,
    DEFAULT_PAYLOAD_AUGMENT_FACTOR,
    DEFAULT_PILOT_AUGMENT_FACTOR,
    DEFAULT_PILOTS,
    DEFAULT_RICIAN_FACTOR_DB,
    DEFAULT_RX_ANTENNAS,
    DEFAULT_SEED,
    DEFAULT_STREAMS,
    DEFAULT_SYMBOL_RATE_HZ,
    DEFAULT_TX_ANTENNAS,
    MIN_PILOTS,
)
from cyclemimo.exceptions import ConfigError
from cyclemimo.link import PACoeffs
from cyclemimo.logging import get_logger
from cyclemimo.models import DetectorKind, LossWeights

logger = get_logger(__name__)

DEFAULT_CONFIG_PATHS = [
    Path("./cyclemimo.yaml"),
    Path("./cyclemimo.yml"),
    Path("~/.config/cyclemimo/config.yaml").expanduser(),
]

ProfileName = Literal["paper", "full", "smoke"]

# "full" is kept as an alias of "paper".
PROFILES: dict[str, dict[str, Any]] = {
    "paper": {},
    "full": {},
    "smoke": {
        "system": {
            "tx_antennas": 8,
            "rx_antennas": 8,
            "streams": 8,
            "block_length": 80,
            "pilots": 16,
            "payload": 64,
        },
        "network": {
            "generator_hidden": [128, 256],
            "discriminator_hidden": [256, 128],
        },
        "training": {
            # 16 pilots give 120 augmented training rows, less than one default batch.
            "batch_size": 32,
        },
        "sweep": {
            "ebn0_db": [10.0, 20.0, 30.0],
            "blocks_per_point": 10,
        },
        "output": {
            "record_wallclock": False,
        },
    },
}


def _none_as_empty(value: Any) -> Any:
    return {} if value is None else value


class SystemConfig(BaseModel):
    tx_antennas: int = Field(DEFAULT_TX_ANTENNAS, ge=1, description="Number of transmit antennas N_s.")
    rx_antennas: int = Field(DEFAULT_RX_ANTENNAS, ge=1, description="Number of receive antennas N_r.")
    streams: int = Field(DEFAULT_STREAMS, ge=1, description="Number of precoded spatial streams.")
    block_length: int = Field(DEFAULT_BLOCK_LENGTH, ge=2, description="Symbols per coherence block K.")
    pilots: int = Field(DEFAULT_PILOTS, ge=1, description="Pilot symbols per block P.")
    payload: int = Field(DEFAULT_PAYLOAD, ge=1, description="Payload symbols per block D.")
    symbol_rate_hz: float = Field(DEFAULT_SYMBOL_RATE_HZ, gt=0, description="Symbol rate; fixes the block period.")

    @property
    def block_period_s(self) -> float:
        return self.block_length / self.symbol_rate_hz


class ChannelConfig(BaseModel):
    kind: Literal["rayleigh", "rician"] = Field("rayleigh", description="Fading model.")
    rician_factor_db: float = Field(DEFAULT_RICIAN_FACTOR_DB, description="Rician K factor in dB.")
    doppler_hz: float = Field(DEFAULT_DOPPLER_HZ, ge=0, description="Maximum Doppler shift in Hz.")
    oscillators: int = Field(DEFAULT_OSCILLATORS, ge=1, description="Sinusoids per Jakes process.")

    @property
    def rician_factor(self) -> float:
        """Linear K factor; 0 for Rayleigh fading."""
        if self.kind == "rayleigh":
            return 0.0
        return 10.0 ** (self.rician_factor_db / 10.0)


class NonlinearityConfig(BaseModel):
    enabled: bool = Field(False, description="Apply the power amplifier polynomial at the transmitter.")
    coefficients: list[float] = Field(
        default_factory=lambda: list(DEFAULT_PA_COEFFICIENTS),
        min_length=1,
        description="Odd-order coefficients a_1, a_3, ...",
    )
    model: Literal["literal", "amplitude"] = Field("literal", description="Polynomial on x^(2i-1) or x|x|^(2i-2).")

    def coeffs(self) -> PACoeffs | None:
        if not self.enabled:
            return None
        return PACoeffs(coefficients=tuple(self.coefficients), model=self.model)


class NetworkConfig(BaseModel):
    generator_hidden: list[int] = Field(default_factory=lambda: list(DEFAULT_GENERATOR_HIDDEN), min_length=1)
    discriminator_hidden: list[int] = Field(default_factory=lambda: list(DEFAULT_DISCRIMINATOR_HIDDEN), min_length=1)
    leaky_slope: float = Field(DEFAULT_LEAKY_SLOPE, gt=0)
    dropout_rate: float = Field(DEFAULT_DROPOUT_RATE, ge=0, lt=1)


class TrainingConfig(BaseModel):
    epoch_cap: int = Field(
        DEFAULT_EPOCH_CAP, ge=1, description="Hard limit on epochs per block, shared by the pilot and payload phases."
    )
    patience: int = Field(DEFAULT_PATIENCE, ge=1, description="Epochs without validation progress before stopping.")
    batch_size: int = Field(DEFAULT_BATCH_SIZE, ge=1)
    learning_rate: float = Field(DEFAULT_LEARNING_RATE, gt=0)
    beta1: float = Field(DEFAULT_BETA1, ge=0, lt=1)
    beta2: float = Field(DEFAULT_BETA2, ge=0, lt=1)
    epsilon: float = Field(DEFAULT_ADAM_EPSILON, gt=0)
    l2_coeff: float = Field(DEFAULT_L2_COEFF, ge=0)
    label_invert_prob: float = Field(DEFAULT_LABEL_INVERT_PROB, ge=0, le=1)
    pilot_augment_factor: int = Field(DEFAULT_PILOT_AUGMENT_FACTOR, ge=1)
    payload_augment_factor: int = Field(DEFAULT_PAYLOAD_AUGMENT_FACTOR, ge=1)
    augment_noise_std: float = Field(DEFAULT_AUGMENT_NOISE_STD, ge=0)
    shared_scaling: bool = Field(False, description="Normalize received rows by the transmitted maxima.")
    pilot_weights: Annotated[LossWeights, BeforeValidator(_none_as_empty)] = Field(default_factory=LossWeights)
    data_weights: Annotated[LossWeights, BeforeValidator(_none_as_empty)] = Field(default_factory=LossWeights)


class SweepConfig(BaseModel):
    ebn0_db: list[float] = Field(default_factory=lambda: list(DEFAULT_EBN0_DB))
    blocks_per_point: int = Field(DEFAULT_BLOCKS_PER_POINT, ge=1)
    detectors: list[DetectorKind] = Field(
        default_factory=lambda: [DetectorKind.LMMSE, DetectorKind.DNN, DetectorKind.CYCLEDNN, DetectorKind.CYCLEGAN]
    )
    seed: int = Field(DEFAULT_SEED, ge=0)
    workers: int = Field(1, ge=1, description="Eb/N0 points simulated concurrently.")
    rate_full_frame: bool = Field(False, description="Report rates without the D/K payload fraction.")


class OutputConfig(BaseModel):
    path: Path = Field(Path(DEFAULT_OUTPUT_PATH), description="Per-block metrics CSV.")
    curves_path: Path | None = Field(None, description="Optional per-curve aggregate CSV.")
    channel_dump_path: Path | None = Field(None, description="Optional CSV of every generated channel matrix.")
    record_wallclock: bool = Field(True, description="Write measured wallclock seconds instead of 0.")


class ExperimentConfig(BaseModel):
    system: Annotated[SystemConfig, BeforeValidator(_none_as_empty)] = Field(default_factory=SystemConfig)
    channel: Annotated[ChannelConfig, BeforeValidator(_none_as_empty)] = Field(default_factory=ChannelConfig)
    nonlinearity: Annotated[NonlinearityConfig, BeforeValidator(_none_as_empty)] = Field(
        default_factory=NonlinearityConfig
    )
    network: Annotated[NetworkConfig, BeforeValidator(_none_as_empty)] = Field(default_factory=NetworkConfig)
    training: Annotated[TrainingConfig, BeforeValidator(_none_as_empty)] = Field(default_factory=TrainingConfig)
    sweep: Annotated[SweepConfig, BeforeValidator(_none_as_empty)] = Field(default_factory=SweepConfig)
    output: Annotated[OutputConfig, BeforeValidator(_none_as_empty)] = Field(default_factory=OutputConfig)


def find_config_file(config_option: Path | None = None) -> Path | None:
    """Explicit path if given (it must exist), else the first default location that exists."""
    if config_option is not None:
        if not config_option.is_file():
            logger.error("Config file not found", path=str(config_option))
            raise ConfigError(f"Config file not found: {config_option}")
        return config_option

    for path in DEFAULT_CONFIG_PATHS:
        logger.debug("Checking path for config file", path=str(path))
        if path.is_file():
            logger.debug("Found config file", path=str(path))
            return path

    logger.debug("No config file found, using defaults")
    return None


def load_config_from_file(file_path: Path) -> dict:
    try:
        with open(file_path, encoding="utf-8") as f:
            config_data = yaml.safe_load(f)
    except FileNotFoundError as e:
        logger.error("Config file not found", path=str(file_path))
        raise ConfigError("Config file not found") from e
    except yaml.YAMLError as e:
        logger.error("Error parsing YAML file", path=str(file_path), error=str(e))
        raise ConfigError("Error parsing YAML file") from e
    except Exception as e:
        logger.error("Error reading config file", path=str(file_path), error=str(e))
        raise ConfigError("Error reading config file") from e

    if config_data is None:
        logger.warning("Config file is empty, using defaults", path=str(file_path))
        return {}
    if not isinstance(config_data, dict):
        logger.error("Config file is not a mapping", path=str(file_path))
        raise ConfigError("Config file must contain a mapping at the top level")

    logger.debug("Loaded configuration", path=str(file_path))
    return config_data


def deep_merge(base: dict, override: dict) -> dict:
    """Recursive dict merge; `override` wins on conflicts and neither input is modified."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def parse_config(
    config_path: Path | None = None,
    overrides: dict | None = None,
    profile: ProfileName = "paper",
) -> ExperimentConfig:
    """Profile preset, then the config file, then command-line overrides."""
    if profile not in PROFILES:
        raise ConfigError(f"Unknown profile '{profile}'")
    overrides = overrides or {}

    config_data = PROFILES[profile]
    config_file = find_config_file(config_path)
    if config_file is not None:
        config_data = deep_merge(config_data, load_config_from_file(config_file))
    config_data = deep_merge(config_data, overrides)

    system_overrides = overrides.get("system") or {}
    if "pilots" in system_overrides and "payload" not in system_overrides:
        system = config_data.setdefault("system", {})
        system["payload"] = system.get("block_length", DEFAULT_BLOCK_LENGTH) - system_overrides["pilots"]

    try:
        experiment_config = ExperimentConfig(**config_data)
    except ValidationError as e:
        logger.error("Error validating experiment configuration", error=str(e))
        raise ConfigError(f"Invalid configuration: {_describe_validation_error(e)}") from e

    _validate_experiment_config(experiment_config)
    return experiment_config


def _describe_validation_error(error: ValidationError) -> str:
    return "; ".join(f"{'.'.join(str(p) for p in item['loc'])}: {item['msg']}" for item in error.errors())


def _validate_experiment_config(cfg: ExperimentConfig) -> None:
    system = cfg.system
    if system.pilots + system.payload != system.block_length:
        logger.error(
            "Validation failed: block split does not add up",
            pilots=system.pilots,
            payload=system.payload,
            block_length=system.block_length,
        )
        raise ConfigError(
            f"system.pilots + system.payload must equal system.block_length "
            f"({system.pilots} + {system.payload} != {system.block_length})"
        )

    if system.pilots < MIN_PILOTS:
        logger.error("Validation failed: too few pilots", pilots=system.pilots)
        raise ConfigError(f"system.pilots must be at least {MIN_PILOTS}, got {system.pilots}")

    if system.streams > min(system.rx_antennas, system.tx_antennas):
        logger.error("Validation failed: too many streams", streams=system.streams)
        raise ConfigError(
            f"system.streams ({system.streams}) cannot exceed min(rx_antennas, tx_antennas) "
            f"({min(system.rx_antennas, system.tx_antennas)})"
        )

    if not cfg.sweep.ebn0_db:
        logger.error("Validation failed: empty Eb/N0 list")
        raise ConfigError("sweep.ebn0_db must list at least one point")
    if not all(math.isfinite(x) for x in cfg.sweep.ebn0_db):
        raise ConfigError("sweep.ebn0_db must contain finite values")

    if not cfg.sweep.detectors:
        logger.error("Validation failed: no detectors configured")
        raise ConfigError("sweep.detectors must name at least one detector")
    if len(set(cfg.sweep.detectors)) != len(cfg.sweep.detectors):
        raise ConfigError("sweep.detectors must not repeat a detector")


def parse_ebn0_spec(spec: str) -> list[float]:
    """'start:step:stop' (inclusive) or a comma-separated list."""
    try:
        if ":" in spec:
            start, step, stop = (float(part) for part in spec.split(":"))
            if step <= 0 or stop < start:
                raise ConfigError(f"Eb/N0 range '{spec}' needs a positive step and stop >= start")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [float(x) for x in np.round(start + step * np.arange(count), 10)]
        return [float(part) for part in spec.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"Cannot parse Eb/N0 list '{spec}'") from e


def parse_channel_spec(spec: str) -> dict[str, Any]:
    """'rayleigh' or 'rician:<K>db' into channel config overrides."""
    kind, _, factor = spec.lower().partition(":")
    if kind == "rayleigh" and not factor:
        return {"kind": "rayleigh"}
    if kind == "rician":
        if not factor:
            return {"kind": "rician"}
        try:
            return {"kind": "rician", "rician_factor_db": float(factor.removesuffix("db"))}
        except ValueError as e:
            raise ConfigError(f"Cannot parse Rician factor in '{spec}'") from e
    raise ConfigError(f"Unknown channel '{spec}', expected rayleigh or rician:<K>db")
