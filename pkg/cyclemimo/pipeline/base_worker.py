import asyncio
from collections.abc import Callable

from cyclemimo.logging import get_logger

logger = get_logger(__name__)


class BaseWorker:
    def __init__(self, record_failure: Callable[[Exception], None], abort_event: asyncio.Event) -> None:
        self.record_failure = record_failure
        self.abort_event = abort_event

    def _record_failure(self, error: Exception) -> None:
        self.record_failure(error)

    def _aborted(self, log_context: dict[str, object], **progress: object) -> bool:
        """True once another worker has failed; logs where this worker stopped."""
        if not self.abort_event.is_set():
            return False
        logger.warning("Abandoning work after a failure elsewhere", **log_context, **progress)
        return True
