"""Single consumer that gathers records from all point workers."""

import asyncio

from cyclemimo.logging import get_logger
from cyclemimo.pipeline.types import RecordItem
from cyclemimo.processing_counts import SweepCounts

logger = get_logger(__name__)


class CollectWorker:
    def __init__(self) -> None:
        self.items: list[RecordItem] = []

    async def run(
        self,
        out_queue: asyncio.Queue[RecordItem | None],
        producers: int,
        counts: SweepCounts,
    ) -> list[RecordItem]:
        """Drain the queue until every producer has sent its sentinel; returns items in sweep order."""
        finished = 0
        while finished < producers:
            item = await out_queue.get()
            if item is None:
                finished += 1
            else:
                self.items.append(item)
                counts.increment_records()
                logger.debug(
                    "Collected record",
                    ebn0_db=item.record.ebn0_db,
                    block_index=item.block_index,
                    detector=str(item.record.detector),
                    ber=item.record.ber,
                )
            out_queue.task_done()

        self.items.sort(key=lambda item: item.sort_key)
        return self.items
