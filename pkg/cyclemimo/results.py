"""CSV output of per-block metrics and per-curve aggregates."""

import csv
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from cyclemimo.constants import CSV_FLOAT_FORMAT
from cyclemimo.exceptions import CycleMimoError
from cyclemimo.logging import get_logger
from cyclemimo.models import CurvePoint, MetricsRecord

logger = get_logger(__name__)

RECORD_FIELDS = list(MetricsRecord.model_fields)
CURVE_FIELDS = list(CurvePoint.model_fields)


def _format(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return CSV_FLOAT_FORMAT.format(value)
    return str(value)


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format(value) for value in row])
            count += 1
    return count


def write_csv(records: Sequence[MetricsRecord], path: Path) -> None:
    rows = ([getattr(record, name) for name in RECORD_FIELDS] for record in records)
    try:
        count = _write_rows(path, RECORD_FIELDS, rows)
    except OSError as e:
        logger.error("Error writing results CSV", path=str(path), error=str(e))
        raise CycleMimoError(f"Error writing results CSV: {path}") from e
    logger.info("Wrote results", path=str(path), records=count)


def read_csv(path: Path) -> list[MetricsRecord]:
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != RECORD_FIELDS:
            raise CycleMimoError(f"Unexpected results header in {path}: {reader.fieldnames}")
        records = []
        for line, row in enumerate(reader, start=2):
            try:
                records.append(MetricsRecord.model_validate(row))
            except ValidationError as e:
                logger.error("Invalid results row", path=str(path), line=line, error=str(e))
                raise CycleMimoError(f"Invalid results row at {path}:{line}: {e.errors()[0]['msg']}") from e
        return records


def aggregate_curves(records: Iterable[MetricsRecord]) -> list[CurvePoint]:
    """Mean BER and mean rate per (Eb/N0, detector), in first-appearance order."""
    groups: dict[tuple[float, str], list[MetricsRecord]] = {}
    for record in records:
        groups.setdefault((record.ebn0_db, record.detector), []).append(record)
    return [
        CurvePoint(
            ebn0_db=ebn0_db,
            detector=detector,  # type: ignore[arg-type]
            mean_ber=float(np.mean([r.ber for r in group])),
            mean_rate=float(np.mean([r.achievable_rate_bits_per_use for r in group])),
        )
        for (ebn0_db, detector), group in groups.items()
    ]


def write_curves_csv(points: Sequence[CurvePoint], path: Path) -> None:
    rows = ([getattr(point, name) for name in CURVE_FIELDS] for point in points)
    try:
        count = _write_rows(path, CURVE_FIELDS, rows)
    except OSError as e:
        logger.error("Error writing curves CSV", path=str(path), error=str(e))
        raise CycleMimoError(f"Error writing curves CSV: {path}") from e
    logger.info("Wrote curves", path=str(path), points=count)
