"""
Logging utilities for the rcvf kernel.

Provides structured logging with JSON or console format. Logs are written to
stderr so that command results on stdout stay machine readable.
"""

import logging
import sys
from typing import Any

import structlog
from structlog.stdlib import LoggerFactory

import constants


def setup_logging(
    level: str | None = None,
    format_type: str | None = None,
) -> structlog.stdlib.BoundLogger:
    """
    Set up structured logging for the application.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        format_type: Log format type ("json" or "text")

    Returns:
        Configured structlog logger instance
    """
    level = level or constants.LOG_LEVEL
    format_type = format_type or constants.LOG_FORMAT

    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, level.upper()),
        force=True,
    )

    renderer: Any
    if format_type.lower() == "json":
        renderer = structlog.processors.JSONRenderer()
    else:
        renderer = structlog.dev.ConsoleRenderer(colors=False)

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            renderer,
        ],
        context_class=dict,
        logger_factory=LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )

    logger = structlog.get_logger(constants.SERVICE_NAME)
    return logger.bind(
        service_name=constants.SERVICE_NAME,
        service_version=constants.SERVICE_VERSION,
    )


def get_logger(name: str | None = None) -> structlog.stdlib.BoundLogger:
    """
    Get a logger instance.

    Args:
        name: Logger name (optional)

    Returns:
        Configured structlog logger
    """
    if name:
        return structlog.get_logger(name)
    return structlog.get_logger(constants.SERVICE_NAME)


def log_stage_start(log: Any, stage: str, **context: Any) -> None:
    """Log the start of an algorithm stage."""
    log.info("Stage started", stage=stage, phase="start", **context)


def log_stage_completion(
    log: Any,
    stage: str,
    duration_seconds: float,
    **context: Any,
) -> None:
    """Log stage completion with summary."""
    log.info(
        "Stage completed",
        stage=stage,
        duration_seconds=round(duration_seconds, 3),
        phase="complete",
        **context,
    )


def log_case_split(log: Any, query: str, depth: int, leaves_so_far: int) -> None:
    """Log a sign query that opens branches in a case tree."""
    log.debug(
        "Case split",
        query=query,
        depth=depth,
        leaves_so_far=leaves_so_far,
        phase="case_split",
    )


def log_oracle_verdict(
    log: Any,
    checked: int,
    failures: list[str],
    t0_exponents: list[int],
) -> None:
    """Log the outcome of a numeric cross-check."""
    if failures:
        log.warning(
            "Oracle check failed",
            checked=checked,
            failures_count=len(failures),
            failures=failures,
            t0_exponents=t0_exponents,
            phase="oracle",
        )
    else:
        log.info(
            "Oracle check passed",
            checked=checked,
            t0_exponents=t0_exponents,
            phase="oracle",
        )


# Module-level logger for this file
logger = get_logger(__name__)
