from pathlib import Path
from unittest.mock import mock_open

import numpy as np
import pytest
import yaml

from cyclemimo.channel import ChannelMeta, ChannelRealization
from cyclemimo.config import NetworkConfig, TrainingConfig


@pytest.fixture
def rng():
    """Fixture providing a fixed-seed generator."""
    return np.random.default_rng(1234)


@pytest.fixture
def valid_config_dict():
    """Fixture providing a valid, small configuration dictionary."""
    return {
        "system": {
            "tx_antennas": 4,
            "rx_antennas": 4,
            "streams": 2,
            "block_length": 40,
            "pilots": 8,
            "payload": 32,
        },
        "channel": {"kind": "rician", "rician_factor_db": 10, "doppler_hz": 100},
        "training": {"epoch_cap": 50, "patience": 5, "batch_size": 32},
        "sweep": {"ebn0_db": [5, 10], "blocks_per_point": 2, "detectors": ["lmmse", "dnn"], "seed": 7},
        "output": {"path": "out.csv"},
    }


@pytest.fixture
def invalid_config_dict():
    """Fixture providing a configuration whose block split does not add up."""
    return {"system": {"block_length": 320, "pilots": 300, "payload": 100}}


@pytest.fixture
def mock_config_file(valid_config_dict):
    """Fixture providing a mock file with valid YAML config content."""
    return mock_open(read_data=yaml.dump(valid_config_dict))


@pytest.fixture
def mock_config_path():
    """Fixture providing a mock config file path."""
    return Path("/mock/path/cyclemimo.yaml")


@pytest.fixture
def tiny_network():
    return NetworkConfig(generator_hidden=[16], discriminator_hidden=[16], dropout_rate=0.0)


@pytest.fixture
def fast_training():
    """Training settings small enough for unit tests."""
    return TrainingConfig(
        epoch_cap=20,
        patience=5,
        batch_size=32,
        pilot_augment_factor=2,
        payload_augment_factor=2,
    )


def identity_channel(size: int, block_index: int = 0) -> ChannelRealization:
    return ChannelRealization.from_matrix(np.eye(size, dtype=np.complex128), block_index, ChannelMeta(0.0, 0.0, 0))


@pytest.fixture
def identity_channel_factory():
    return identity_channel
