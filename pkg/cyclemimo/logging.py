import logging
import sys
from collections.abc import Iterable

import numpy as np
import structlog
from structlog.typing import EventDict, WrappedLogger


def _numpy_scalars_as_python(_logger: WrappedLogger, _method: str, event_dict: EventDict) -> EventDict:
    """Render np.float64(0.25) as 0.25 in log lines."""
    for key, value in event_dict.items():
        if isinstance(value, np.generic):
            event_dict[key] = value.item()
    return event_dict


def configure_logging(log_level_str: str = "INFO") -> None:
    log_level = getattr(logging, log_level_str.upper(), logging.INFO)

    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=log_level,
    )

    for logger_name in logging.root.manager.loggerDict:
        if not logger_name.startswith("cyclemimo"):
            logging.getLogger(logger_name).setLevel(logging.WARNING)
    logging.getLogger("asyncio").setLevel(logging.WARNING)

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="%Y-%m-%d %H:%M:%S"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            _numpy_scalars_as_python,
            structlog.dev.ConsoleRenderer(),
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    return structlog.get_logger(name)


def format_log_preview(values: Iterable[float], item_limit: int = 8, precision: int = 4) -> str:
    """
    Formats a numeric sequence for log preview: renders each value with `precision`
    significant digits, keeps at most `item_limit` items, and adds ellipsis if more remain.
    """
    items = list(values)
    if not items:
        return "[]"
    shown = ", ".join(f"{float(v):.{precision}g}" for v in items[:item_limit])
    if len(items) > item_limit:
        return f"[{shown}, ...]" if shown else "[...]"
    return f"[{shown}]"
