#!/usr/bin/env python3

import sys
import os

project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from cyclemimo.exceptions import CycleMimoError
from cyclemimo.logging import configure_logging, get_logger, format_log_preview
from cyclemimo.results import aggregate_curves, read_csv, write_curves_csv

logger = get_logger("merge_curves")

def main():
    import argparse
    from pathlib import Path

    parser = argparse.ArgumentParser(description="Average several results CSVs into one curves CSV.")
    parser.add_argument("results", nargs="+", type=Path, help="Results CSVs written by `cyclemimo run`.")
    parser.add_argument(
        "--out", type=Path, default=Path("curves.csv"), help="Curves CSV to write (default: curves.csv)."
    )
    parser.add_argument(
        "--detector",
        action="append",
        default=None,
        help="Keep only this detector; repeat to keep several (default: all).",
    )
    parser.add_argument(
        "--log-level",
        type=str,
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        default="INFO",
        help="Set the logging level (default: INFO).",
    )
    args = parser.parse_args()

    configure_logging(args.log_level.upper())

    records = []
    for path in args.results:
        try:
            loaded = read_csv(path)
        except (OSError, CycleMimoError) as e:
            logger.error("Could not read results file", path=str(path), error=str(e))
            sys.exit(1)
        seeds = sorted({record.seed for record in loaded})
        logger.info("Loaded results", path=str(path), records=len(loaded), seeds=seeds)
        records.extend(loaded)

    if args.detector:
        records = [record for record in records if record.detector in args.detector]
        logger.debug("Filtered detectors", detectors=args.detector, remaining=len(records))

    if not records:
        logger.warning("No records left to aggregate.")
        sys.exit(0)

    points = aggregate_curves(records)
    for detector in dict.fromkeys(point.detector for point in points):
        curve = [point.mean_ber for point in points if point.detector == detector]
        logger.info("Mean BER per Eb/N0 point", detector=str(detector), ber=format_log_preview(curve))

    try:
        write_curves_csv(points, args.out)
    except CycleMimoError as e:
        logger.error("Could not write curves file", error=str(e))
        sys.exit(1)

if __name__ == "__main__":
    main()
