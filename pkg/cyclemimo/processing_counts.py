"""Shared counters for the sweep pipeline workers."""

from dataclasses import dataclass


@dataclass
class SweepCounts:
    """Track completed blocks, collected records and failed points."""

    blocks: int = 0
    records: int = 0
    failed: int = 0

    def increment_blocks(self) -> None:
        """Increment the completed block count."""

        self.blocks += 1

    def increment_records(self, count: int = 1) -> None:
        """Increment the collected record count."""

        self.records += count

    def increment_failed(self) -> None:
        """Increment the failed point count."""

        self.failed += 1
