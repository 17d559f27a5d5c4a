"""
copsens Structured Logging

Configures structured logging using structlog. Logs go to standard error so
that standard output stays free for machine-readable command output.

Every record carries the application name, and records emitted inside
``run_context`` also carry the run id (the analysis config digest or the
simulated scenario and seed), so the log lines of one run can be pulled out
of a shared stream.
"""

import logging
import sys
from collections.abc import Iterator, MutableMapping
from contextlib import contextmanager
from typing import Any

import numpy as np
import structlog

from copsens.platform.config import settings


def add_app_name(_: Any, __: str, event_dict: MutableMapping[str, Any]) -> MutableMapping[str, Any]:
    event_dict.setdefault("app", settings.APP_NAME)
    return event_dict


def coerce_numpy(_: Any, __: str, event_dict: MutableMapping[str, Any]) -> MutableMapping[str, Any]:
    """Replace numpy scalars and arrays with plain Python values."""
    for key, value in event_dict.items():
        if isinstance(value, np.generic):
            event_dict[key] = value.item()
        elif isinstance(value, np.ndarray):
            event_dict[key] = value.tolist()
    return event_dict


def configure_logging(level: str | None = None) -> None:
    """Configure structured logging for the application."""

    log_level = getattr(logging, (level or settings.LOG_LEVEL).upper(), logging.INFO)

    structlog.configure(
        processors=[
            # Add context variables from contextvars (run_id, command)
            structlog.contextvars.merge_contextvars,
            add_app_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.add_logger_name,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            coerce_numpy,
            # Render to JSON in production, console in development
            structlog.processors.JSONRenderer()
            if settings.APP_ENV == "production"
            else structlog.dev.ConsoleRenderer(colors=False),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(log_level),
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )

    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=log_level,
        force=True,
    )


@contextmanager
def run_context(run_id: str, **fields: Any) -> Iterator[None]:
    """Bind ``run_id`` and extra fields to every record logged inside the block."""
    with structlog.contextvars.bound_contextvars(run_id=run_id, **fields):
        yield


def get_logger(name: str | None = None) -> structlog.stdlib.BoundLogger:
    """Get a structured logger instance."""
    return structlog.get_logger(name)
