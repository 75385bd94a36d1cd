from unittest.mock import patch

import pytest
import yaml
from click.testing import CliRunner

from cyclemimo.cli import build_overrides, cli
from cyclemimo.exceptions import ConfigError, ExperimentError


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "cyclemimo.yaml"
    path.write_text(
        yaml.dump(
            {
                "system": {
                    "tx_antennas": 4,
                    "rx_antennas": 2,
                    "streams": 2,
                    "block_length": 20,
                    "pilots": 8,
                    "payload": 12,
                },
                "sweep": {"detectors": ["lmmse"], "blocks_per_point": 2},
                "output": {"record_wallclock": False},
            }
        ),
        encoding="utf-8",
    )
    return path


def test_run_writes_results(config_file, tmp_path):
    out = tmp_path / "results.csv"
    curves = tmp_path / "curves.csv"
    result = CliRunner().invoke(
        cli,
        ["run", "--config", str(config_file), "--ebn0", "0,4", "--out", str(out), "--curves-out", str(curves)],
    )

    assert result.exit_code == 0, result.output
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 1 + 2 * 2
    assert lines[1].startswith("0,0,lmmse,")
    assert len(curves.read_text(encoding="utf-8").splitlines()) == 3


def test_pilot_flag_resizes_payload(config_file, tmp_path):
    out = tmp_path / "results.csv"
    with patch("cyclemimo.cli.run_and_write") as run_and_write:
        result = CliRunner().invoke(cli, ["run", "--config", str(config_file), "--pilots", "10", "--out", str(out)])

    assert result.exit_code == 0, result.output
    cfg = run_and_write.call_args.args[0]
    assert (cfg.system.pilots, cfg.system.payload) == (10, 10)


@pytest.mark.parametrize(("profile", "tx_antennas"), [("paper", 64), ("full", 64), ("smoke", 8)])
def test_profile_flag(profile, tx_antennas):
    with (
        patch("cyclemimo.config.find_config_file", return_value=None),
        patch("cyclemimo.cli.run_and_write") as run_and_write,
    ):
        result = CliRunner().invoke(cli, ["run", "--profile", profile])

    assert result.exit_code == 0, result.output
    assert run_and_write.call_args.args[0].system.tx_antennas == tx_antennas


def test_invalid_block_split_exits(config_file):
    result = CliRunner().invoke(cli, ["run", "--config", str(config_file), "--pilots", "30"])
    assert result.exit_code == 1


def test_unknown_detector_exits(config_file):
    result = CliRunner().invoke(cli, ["run", "--config", str(config_file), "--detectors", "lmmse,zf"])
    assert result.exit_code == 1


def test_experiment_failure_exits(config_file):
    with patch("cyclemimo.cli.run_and_write", side_effect=ExperimentError("diverged")):
        result = CliRunner().invoke(cli, ["run", "--config", str(config_file)])
    assert result.exit_code == 1


def test_missing_config_file_rejected_by_click(tmp_path):
    result = CliRunner().invoke(cli, ["run", "--config", str(tmp_path / "nope.yaml")])
    assert result.exit_code == 2


class TestBuildOverrides:
    def test_empty(self):
        assert build_overrides() == {}

    def test_all_flags(self, tmp_path):
        overrides = build_overrides(
            ebn0="5:5:15",
            blocks=4,
            pilots=160,
            detectors="lmmse, cyclegan",
            pa="on",
            channel="rician:10db",
            doppler=100.0,
            seed=3,
            out=tmp_path / "r.csv",
        )
        assert overrides == {
            "sweep": {
                "ebn0_db": [5.0, 10.0, 15.0],
                "blocks_per_point": 4,
                "detectors": ["lmmse", "cyclegan"],
                "seed": 3,
            },
            "system": {"pilots": 160},
            "nonlinearity": {"enabled": True},
            "channel": {"kind": "rician", "rician_factor_db": 10.0, "doppler_hz": 100.0},
            "output": {"path": str(tmp_path / "r.csv")},
        }

    def test_pa_off(self):
        assert build_overrides(pa="off") == {"nonlinearity": {"enabled": False}}

    def test_unknown_detector(self):
        with pytest.raises(ConfigError, match="zf"):
            build_overrides(detectors="zf")
