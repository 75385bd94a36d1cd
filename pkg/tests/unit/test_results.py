import pytest

from cyclemimo.exceptions import CycleMimoError
from cyclemimo.models import DetectorKind, MetricsRecord
from cyclemimo.results import RECORD_FIELDS, aggregate_curves, read_csv, write_csv, write_curves_csv


def make_record(**overrides) -> MetricsRecord:
    values = {
        "ebn0_db": 10.0,
        "block_index": 0,
        "detector": DetectorKind.CYCLEGAN,
        "ber": 0.0123456789,
        "achievable_rate_bits_per_use": 12.5,
        "epochs_run": 42,
        "used_previous_pilots": True,
        "pseudo_label_refreshes": 3,
        "wallclock_s": 0.0,
        "seed": 7,
    }
    values.update(overrides)
    return MetricsRecord(**values)


def test_header_only_for_no_records(tmp_path):
    path = tmp_path / "results.csv"
    write_csv([], path)
    assert path.read_bytes() == (",".join(RECORD_FIELDS) + "\n").encode("utf-8")


def test_one_record_is_two_lines(tmp_path):
    path = tmp_path / "results.csv"
    write_csv([make_record()], path)

    content = path.read_bytes()
    assert b"\r" not in content
    lines = content.decode("utf-8").splitlines()
    assert len(lines) == 2
    assert lines[0] == (
        "ebn0_db,block_index,detector,ber,achievable_rate_bits_per_use,epochs_run,"
        "used_previous_pilots,pseudo_label_refreshes,wallclock_s,seed"
    )
    assert lines[1] == "10,0,cyclegan,0.0123456789,12.5,42,true,3,0,7"


def test_floats_use_ten_significant_digits(tmp_path):
    path = tmp_path / "results.csv"
    write_csv([make_record(ber=1 / 3)], path)
    assert ",0.3333333333," in path.read_text(encoding="utf-8")


def test_read_back(tmp_path):
    records = [
        make_record(),
        make_record(block_index=1, detector=DetectorKind.LMMSE, used_previous_pilots=False, epochs_run=0),
    ]
    path = tmp_path / "results.csv"
    write_csv(records, path)
    assert read_csv(path) == records


def test_read_rejects_foreign_header(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("a,b\n1,2\n", encoding="utf-8")
    with pytest.raises(CycleMimoError, match="header"):
        read_csv(path)


def test_read_rejects_bad_row(tmp_path):
    path = tmp_path / "results.csv"
    write_csv([make_record(), make_record(block_index=1)], path)
    lines = path.read_text(encoding="utf-8").splitlines()
    lines[2] = lines[2].replace("cyclegan", "zf")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    with pytest.raises(CycleMimoError, match=r"results\.csv:3"):
        read_csv(path)


def test_unwritable_path(tmp_path):
    with pytest.raises(CycleMimoError, match="Error writing results CSV"):
        write_csv([make_record()], tmp_path / "missing" / "results.csv")


def test_curves(tmp_path):
    records = [
        make_record(ebn0_db=5.0, detector=DetectorKind.DNN, ber=0.25, achievable_rate_bits_per_use=4.0),
        make_record(ebn0_db=5.0, detector=DetectorKind.DNN, ber=0.75, achievable_rate_bits_per_use=2.0),
        make_record(ebn0_db=5.0, detector=DetectorKind.LMMSE, ber=0.5, achievable_rate_bits_per_use=1.0),
    ]
    points = aggregate_curves(records)

    assert [(p.detector, p.mean_ber, p.mean_rate) for p in points] == [
        (DetectorKind.DNN, 0.5, 3.0),
        (DetectorKind.LMMSE, 0.5, 1.0),
    ]

    path = tmp_path / "curves.csv"
    write_curves_csv(points, path)
    assert path.read_text(encoding="utf-8").splitlines() == [
        "ebn0_db,detector,mean_ber,mean_rate",
        "5,dnn,0.5,3",
        "5,lmmse,0.5,1",
    ]
