import asyncio
from concurrent.futures import ThreadPoolExecutor

from cyclemimo.config import ExperimentConfig
from cyclemimo.exceptions import ExperimentError
from cyclemimo.logging import get_logger
from cyclemimo.models import MetricsRecord, RunStats
from cyclemimo.pipeline import CollectWorker, PointTask, PointWorker, RecordItem
from cyclemimo.processing_counts import SweepCounts
from cyclemimo.results import aggregate_curves, write_csv, write_curves_csv
from cyclemimo.simulation import PointSimulation

logger = get_logger(__name__)


class ExperimentRunner:
    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.executor: ThreadPoolExecutor | None = None
        self.stats = RunStats(points=0, blocks=0, records=0)

    def __enter__(self) -> "ExperimentRunner":
        """Start the worker threads for context manager usage."""
        self.executor = ThreadPoolExecutor(max_workers=self.config.sweep.workers, thread_name_prefix="cyclemimo-point")
        return self

    def __exit__(self, exc_type, exc, exc_tb) -> bool:
        """Stop the worker threads when exiting a context."""
        if self.executor is not None:
            self.executor.shutdown(wait=True)
            self.executor = None
        return False

    def _make_simulation(self, task: PointTask) -> PointSimulation:
        return PointSimulation(self.config, task)

    def run(self) -> list[MetricsRecord]:
        """Simulate every configured point; records come back in (Eb/N0, block, detector) order."""
        if self.executor is None:
            raise ExperimentError("ExperimentRunner must be used as a context manager")

        sweep = self.config.sweep
        logger.info(
            "Starting experiment",
            ebn0_points=len(sweep.ebn0_db),
            blocks_per_point=sweep.blocks_per_point,
            detectors=[str(kind) for kind in sweep.detectors],
            seed=sweep.seed,
            workers=sweep.workers,
        )

        items, counts, failure = asyncio.run(self._run_pipeline())

        if failure is not None:
            logger.critical(
                "Aborting experiment after a failure",
                blocks_completed=counts.blocks,
                records_collected=counts.records,
                error=str(failure),
            )
            if isinstance(failure, ExperimentError):
                raise failure
            raise ExperimentError(f"Experiment aborted: {failure}") from failure

        records = [item.record for item in items]
        expected = len(sweep.ebn0_db) * sweep.blocks_per_point * len(sweep.detectors)
        if len(records) != expected:
            raise ExperimentError(f"Collected {len(records)} records, expected {expected}")

        self.stats = RunStats(points=len(sweep.ebn0_db), blocks=counts.blocks, records=len(records))
        logger.info("Experiment complete", points=self.stats.points, blocks=counts.blocks, records=len(records))
        return records

    async def _run_pipeline(self) -> tuple[list[RecordItem], SweepCounts, Exception | None]:
        loop = asyncio.get_running_loop()
        out_queue: asyncio.Queue[RecordItem | None] = asyncio.Queue()
        abort_event = asyncio.Event()
        counts = SweepCounts()
        failures: list[Exception] = []

        def record_failure(error: Exception) -> None:
            counts.increment_failed()
            failures.append(error)
            abort_event.set()

        point_worker = PointWorker(
            simulation_factory=self._make_simulation,
            record_failure=record_failure,
            abort_event=abort_event,
        )
        collect_worker = CollectWorker()
        sweep_points = enumerate(self.config.sweep.ebn0_db)
        tasks = [PointTask(ebn0_index=index, ebn0_db=ebn0_db) for index, ebn0_db in sweep_points]

        collector_task = asyncio.create_task(collect_worker.run(out_queue, len(tasks), counts))
        executor = self.executor
        if executor is None:
            raise ExperimentError("ExperimentRunner must be used as a context manager")
        point_tasks = [
            asyncio.create_task(point_worker.run(loop, task, out_queue, executor, counts)) for task in tasks
        ]
        await asyncio.gather(*point_tasks)
        items = await collector_task

        return items, counts, failures[0] if failures else None


def run_experiment(config: ExperimentConfig) -> list[MetricsRecord]:
    with ExperimentRunner(config) as runner:
        return runner.run()


def run_and_write(config: ExperimentConfig) -> RunStats:
    """Run the sweep and write every configured output file."""
    with ExperimentRunner(config) as runner:
        records = runner.run()
        stats = runner.stats

    write_csv(records, config.output.path)
    if config.output.curves_path is not None:
        write_curves_csv(aggregate_curves(records), config.output.curves_path)
    return stats

