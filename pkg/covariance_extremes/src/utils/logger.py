import logging
import sys

import structlog

_CONFIGURED = False


def setup_logging(level: str = "INFO") -> None:
    """
    Route stdlib logging through structlog's renderer.

    Modules keep using logging.getLogger(__name__); only the root handler
    changes. Safe to call more than once (later calls only adjust the level).
    """
    global _CONFIGURED
    root = logging.getLogger()
    root.setLevel(level.upper())
    if _CONFIGURED:
        return

    formatter = structlog.stdlib.ProcessorFormatter(
        processor=structlog.dev.ConsoleRenderer(colors=False),
        foreign_pre_chain=[
            structlog.stdlib.add_log_level,
            structlog.stdlib.add_logger_name,
            structlog.processors.TimeStamper(fmt="iso", utc=True),
        ],
    )
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(formatter)
    root.handlers = [handler]
    _CONFIGURED = True
