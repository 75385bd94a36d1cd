"""Directional detection checks on the desk-scale smoke profile, averaged over many seeds."""

from statistics import mean, median
from unittest.mock import patch

import pytest

from cyclemimo.config import parse_config
from cyclemimo.models import DetectorKind, MetricsRecord
from cyclemimo.runner import run_and_write, run_experiment

SEEDS = range(10)

pytestmark = pytest.mark.slow


def smoke_records(out_dir, seed: int, **sections) -> list[MetricsRecord]:
    overrides = {
        "nonlinearity": {"enabled": True},
        "output": {"path": str(out_dir / f"results-{seed}.csv")},
        **sections,
    }
    overrides["sweep"] = {"seed": seed, **sections.get("sweep", {})}
    with patch("cyclemimo.config.find_config_file", return_value=None):
        cfg = parse_config(overrides=overrides, profile="smoke")
    return run_experiment(cfg)


def seed_means(runs: list[list[MetricsRecord]], kind: DetectorKind, ebn0_db: float) -> list[float]:
    """Mean BER over the blocks of each run, one value per seed."""
    return [mean(r.ber for r in records if r.detector is kind and r.ebn0_db == ebn0_db) for records in runs]


@pytest.fixture(scope="module")
def ordering_runs(tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("ordering")
    sweep = {"ebn0_db": [15.0, 20.0, 25.0], "detectors": ["lmmse", "dnn", "cyclednn", "cyclegan"]}
    return [smoke_records(out_dir, seed, sweep=sweep) for seed in SEEDS]


@pytest.mark.parametrize("ebn0_db", [15.0, 20.0, 25.0])
def test_detector_ordering_under_pa(ordering_runs, ebn0_db):
    cyclegan = median(seed_means(ordering_runs, DetectorKind.CYCLEGAN, ebn0_db))
    cyclednn = median(seed_means(ordering_runs, DetectorKind.CYCLEDNN, ebn0_db))
    dnn = median(seed_means(ordering_runs, DetectorKind.DNN, ebn0_db))

    assert cyclegan <= cyclednn <= dnn


@pytest.mark.parametrize("ebn0_db", [20.0, 25.0])
def test_cyclegan_beats_lmmse_under_pa(ordering_runs, ebn0_db):
    cyclegan = median(seed_means(ordering_runs, DetectorKind.CYCLEGAN, ebn0_db))
    lmmse = median(seed_means(ordering_runs, DetectorKind.LMMSE, ebn0_db))

    assert cyclegan <= lmmse


def test_payload_phase_lowers_ber(tmp_path, record_property):
    sweep = {"ebn0_db": [20.0], "detectors": ["cyclegan-sup", "cyclegan"]}
    runs = [smoke_records(tmp_path, seed, sweep=sweep) for seed in SEEDS]
    pilots_only = median(seed_means(runs, DetectorKind.CYCLEGAN_SUP, 20.0))
    with_payload = median(seed_means(runs, DetectorKind.CYCLEGAN, 20.0))

    improvement = 100.0 * (pilots_only - with_payload) / pilots_only if pilots_only else 0.0
    record_property("median_ber_pilots_only", pilots_only)
    record_property("median_ber_with_payload", with_payload)
    record_property("relative_improvement_pct", improvement)

    assert with_payload <= pilots_only
    assert improvement >= 0.0


def test_doubled_overhead_does_not_beat_cyclegan(tmp_path):
    sweep = {"ebn0_db": [20.0]}
    # 20% of an 80-symbol block is the profile's 16 pilots; 50% is 40
    light = [smoke_records(tmp_path, seed, sweep={**sweep, "detectors": ["cyclegan"]}) for seed in SEEDS]
    heavy = [
        smoke_records(
            tmp_path,
            seed,
            sweep={**sweep, "detectors": ["dnn", "cyclednn"]},
            system={"pilots": 40, "payload": 40},
        )
        for seed in SEEDS
    ]
    cyclegan = median(seed_means(light, DetectorKind.CYCLEGAN, 20.0))

    assert median(seed_means(heavy, DetectorKind.DNN, 20.0)) >= cyclegan
    assert median(seed_means(heavy, DetectorKind.CYCLEDNN, 20.0)) >= cyclegan


def test_full_smoke_run_is_byte_identical(tmp_path):
    with patch("cyclemimo.config.find_config_file", return_value=None):
        cfg = parse_config(overrides={"output": {"path": str(tmp_path / "results.csv")}}, profile="smoke")

    run_and_write(cfg)
    first = cfg.output.path.read_bytes()
    run_and_write(cfg)

    assert cfg.output.path.read_bytes() == first
