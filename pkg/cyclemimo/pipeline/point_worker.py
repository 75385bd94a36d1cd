"""Worker that runs the block chain of one Eb/N0 point."""

import asyncio
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from typing import TYPE_CHECKING

from cyclemimo.exceptions import CycleMimoError
from cyclemimo.logging import get_logger
from cyclemimo.pipeline.base_worker import BaseWorker
from cyclemimo.pipeline.types import PointTask, RecordItem
from cyclemimo.processing_counts import SweepCounts

if TYPE_CHECKING:
    from cyclemimo.simulation import PointSimulation

logger = get_logger(__name__)


class PointWorker(BaseWorker):
    """Simulate the blocks of one point in order; blocks warm-start from their predecessor."""

    def __init__(
        self,
        simulation_factory: Callable[[PointTask], "PointSimulation"],
        record_failure: Callable[[Exception], None],
        abort_event: asyncio.Event,
    ) -> None:
        super().__init__(record_failure, abort_event)
        self.simulation_factory = simulation_factory

    async def run(
        self,
        loop: asyncio.AbstractEventLoop,
        task: PointTask,
        out_queue: asyncio.Queue[RecordItem | None],
        executor: ThreadPoolExecutor,
        counts: SweepCounts,
    ) -> None:
        log_context: dict[str, object] = {"ebn0_db": task.ebn0_db, "ebn0_index": task.ebn0_index}
        try:
            if self._aborted(log_context):
                return
            logger.info("Starting Eb/N0 point", **log_context)
            simulation = await loop.run_in_executor(executor, self.simulation_factory, task)

            for block_index in range(simulation.blocks):
                if self._aborted(log_context, block_index=block_index):
                    return
                items = await loop.run_in_executor(executor, simulation.run_block, block_index)
                counts.increment_blocks()
                for item in items:
                    await out_queue.put(item)

            logger.info("Finished Eb/N0 point", **log_context, blocks=simulation.blocks)
        except CycleMimoError as e:
            logger.error("Point failed", **log_context, error_type=type(e).__name__, error=str(e))
            self._record_failure(e)
        finally:
            await out_queue.put(None)
