from cyclemimo.pipeline.base_worker import BaseWorker
from cyclemimo.pipeline.collect_worker import CollectWorker
from cyclemimo.pipeline.point_worker import PointWorker
from cyclemimo.pipeline.types import PointTask, RecordItem

__all__ = [
    "BaseWorker",
    "CollectWorker",
    "PointTask",
    "PointWorker",
    "RecordItem",
]
