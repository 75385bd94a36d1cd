from unittest.mock import patch

import pytest

from cyclemimo.config import parse_config
from cyclemimo.detectors import DetectorSession
from cyclemimo.exceptions import ExperimentError, TrainingStateError
from cyclemimo.models import DetectorKind
from cyclemimo.runner import ExperimentRunner, run_and_write, run_experiment
from cyclemimo.simulation import channel_dump_path


@pytest.fixture
def small_overrides(tmp_path):
    """A sweep small enough to run in seconds."""
    return {
        "system": {"tx_antennas": 4, "rx_antennas": 2, "streams": 2, "block_length": 20, "pilots": 8, "payload": 12},
        "network": {"generator_hidden": [8], "discriminator_hidden": [8], "dropout_rate": 0.0},
        "training": {
            "epoch_cap": 3,
            "patience": 2,
            "batch_size": 32,
            "pilot_augment_factor": 2,
            "payload_augment_factor": 2,
        },
        "sweep": {"ebn0_db": [5.0, 10.0], "blocks_per_point": 3, "detectors": ["lmmse", "dnn"], "seed": 11},
        "output": {"path": str(tmp_path / "results.csv"), "record_wallclock": False},
    }


def small_config(overrides):
    with patch("cyclemimo.config.find_config_file", return_value=None):
        return parse_config(overrides=overrides)


def test_record_accounting_and_order(small_overrides):
    records = run_experiment(small_config(small_overrides))

    assert len(records) == 12
    keys = [(r.ebn0_db, r.block_index, r.detector) for r in records]
    assert keys == [
        (ebn0, block, detector)
        for ebn0 in (5.0, 10.0)
        for block in range(3)
        for detector in (DetectorKind.LMMSE, DetectorKind.DNN)
    ]
    assert all(r.seed == 11 for r in records)
    assert all(r.wallclock_s == 0.0 for r in records)
    lmmse = [r for r in records if r.detector is DetectorKind.LMMSE]
    assert all(r.epochs_run == 0 and not r.used_previous_pilots for r in lmmse)
    dnn = [r for r in records if r.detector is DetectorKind.DNN]
    assert all(0 < r.epochs_run <= 3 for r in dnn)
    assert not dnn[0].used_previous_pilots


def test_reproducible(small_overrides):
    cfg = small_config(small_overrides)
    assert run_experiment(cfg) == run_experiment(cfg)


def test_concurrent_points_match_sequential(small_overrides):
    sequential = run_experiment(small_config(small_overrides))
    small_overrides["sweep"]["workers"] = 2
    assert run_experiment(small_config(small_overrides)) == sequential


def test_detectors_see_identical_blocks(small_overrides):
    both = run_experiment(small_config(small_overrides))
    small_overrides["sweep"]["detectors"] = ["lmmse"]
    alone = run_experiment(small_config(small_overrides))
    assert [r for r in both if r.detector is DetectorKind.LMMSE] == alone


def test_csv_is_byte_identical_across_runs(small_overrides, tmp_path):
    small_overrides["output"]["curves_path"] = str(tmp_path / "curves.csv")
    cfg = small_config(small_overrides)

    stats = run_and_write(cfg)
    first = cfg.output.path.read_bytes()
    run_and_write(cfg)

    assert cfg.output.path.read_bytes() == first
    assert len(first.decode("utf-8").splitlines()) == 13
    assert len(cfg.output.curves_path.read_text(encoding="utf-8").splitlines()) == 1 + 4
    assert (stats.points, stats.blocks, stats.records) == (2, 6, 12)


def test_smoke_profile_csv_is_byte_identical(tmp_path):
    overrides = {
        "training": {"epoch_cap": 3, "patience": 2},
        "sweep": {"ebn0_db": [20.0], "blocks_per_point": 2, "detectors": ["lmmse", "dnn"]},
        "output": {"path": str(tmp_path / "results.csv")},
    }
    with patch("cyclemimo.config.find_config_file", return_value=None):
        cfg = parse_config(overrides=overrides, profile="smoke")

    run_and_write(cfg)
    first = cfg.output.path.read_bytes()
    run_and_write(cfg)

    assert cfg.output.path.read_bytes() == first
    rows = first.decode("utf-8").splitlines()
    wallclock = rows[0].split(",").index("wallclock_s")
    assert all(row.split(",")[wallclock] == "0" for row in rows[1:])


def test_channel_dump_per_point(small_overrides, tmp_path):
    small_overrides["output"]["channel_dump_path"] = str(tmp_path / "channels.csv")
    small_overrides["sweep"]["detectors"] = ["lmmse"]
    run_experiment(small_config(small_overrides))

    for index in range(2):
        lines = (tmp_path / f"channels-ebn0_{index}.csv").read_text(encoding="utf-8").splitlines()
        assert len(lines) == 1 + 3 * 2 * 4


def test_channel_dump_path_single_point(tmp_path):
    base = tmp_path / "h.csv"
    assert channel_dump_path(base, 0, 1) == base
    assert channel_dump_path(base, 2, 3) == tmp_path / "h-ebn0_2.csv"


def test_failure_aborts_with_context(small_overrides):
    cfg = small_config(small_overrides)
    with (
        patch.object(DetectorSession, "process_block", side_effect=TrainingStateError("boom")),
        pytest.raises(ExperimentError, match="boom") as excinfo,
    ):
        run_experiment(cfg)

    assert excinfo.value.block_index == 0
    assert excinfo.value.detector == "lmmse"


def test_runner_requires_context(small_overrides):
    with pytest.raises(ExperimentError, match="context manager"):
        ExperimentRunner(small_config(small_overrides)).run()
