import logging
import sys
from typing import Any

import structlog


def add_app_info(_, __, event_dict: dict[str, Any]) -> dict[str, Any]:
    """Tag every log entry with the application name."""
    event_dict["app"] = "loco"
    return event_dict


def configure_logging(level: str = "WARNING", fmt: str = "console") -> None:
    """Configure structured logging on standard error.

    Standard output is reserved for command results, so records never go there.
    """
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format="%(message)s",
        stream=sys.stderr,
        force=True,
    )
    renderer = (structlog.processors.JSONRenderer(indent=None) if fmt == "json"
                else structlog.dev.ConsoleRenderer(colors=False))

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_log_level,
            structlog.stdlib.add_logger_name,
            structlog.processors.TimeStamper(fmt="%Y-%m-%d %H:%M:%S"),
            add_app_info,
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            renderer,
        ],
        wrapper_class=structlog.stdlib.BoundLogger,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )
