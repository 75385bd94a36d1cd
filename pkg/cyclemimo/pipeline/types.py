from dataclasses import dataclass

from cyclemimo.models import MetricsRecord


@dataclass(frozen=True)
class PointTask:
    ebn0_index: int
    ebn0_db: float


@dataclass(frozen=True)
class RecordItem:
    ebn0_index: int
    block_index: int
    detector_position: int
    record: MetricsRecord

    @property
    def sort_key(self) -> tuple[int, int, int]:
        return (self.ebn0_index, self.block_index, self.detector_position)
