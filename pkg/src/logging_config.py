"""
Logging configuration for asympl.

This module sets up logging with:
- File rotation (app.log for everything, error.log for errors)
- Structured logging (JSON format for log aggregation tools)
- A console handler on stderr, so stdout stays free for reports and --json
- Context fields (subcommand, chart, operation, duration_ms)
"""

import functools
import json
import logging
import logging.handlers
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict


ROOT_LOGGER = "asympl"
_CONTEXT_FIELDS = ("subcommand", "chart", "operation", "duration_ms")


class JSONFormatter(logging.Formatter):
    """Formatter that renders each record as one JSON object."""

    def format(self, record: logging.LogRecord) -> str:
        log_data: Dict[str, Any] = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
            "message": record.getMessage(),
        }

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        for name in _CONTEXT_FIELDS:
            if hasattr(record, name):
                log_data[name] = getattr(record, name)

        return json.dumps(log_data, default=str)


def setup_logging(
    log_level: str = "WARNING",
    log_dir: str = "logs",
    enable_console: bool = True,
    enable_file: bool = False,
    json_format: bool = False,
) -> logging.Logger:
    """
    Configure application-wide logging.

    Args:
        log_level: Minimum log level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_dir: Directory for log files (created if it doesn't exist)
        enable_console: Whether to log to stderr
        enable_file: Whether to log to rotating files
        json_format: Use JSON format for file logs

    Returns:
        The configured `asympl` logger

    Example:
        >>> logger = setup_logging(log_level="DEBUG", json_format=True)
        >>> logger.info("verification started")
    """
    logger = logging.getLogger(ROOT_LOGGER)
    logger.setLevel(getattr(logging, log_level.upper()))
    logger.handlers.clear()

    if enable_console:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(getattr(logging, log_level.upper()))
        console_handler.setFormatter(logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        ))
        logger.addHandler(console_handler)

    if enable_file:
        Path(log_dir).mkdir(parents=True, exist_ok=True)

        if json_format:
            file_format: logging.Formatter = JSONFormatter()
        else:
            file_format = logging.Formatter(
                '%(asctime)s - %(name)s - %(levelname)s - '
                '%(module)s:%(funcName)s:%(lineno)d - %(message)s',
                datefmt='%Y-%m-%d %H:%M:%S'
            )

        file_handler = logging.handlers.RotatingFileHandler(
            filename=str(Path(log_dir) / "app.log"),
            maxBytes=10 * 1024 * 1024,
            backupCount=5,
            encoding='utf-8'
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(file_format)
        logger.addHandler(file_handler)

        error_handler = logging.handlers.RotatingFileHandler(
            filename=str(Path(log_dir) / "error.log"),
            maxBytes=10 * 1024 * 1024,
            backupCount=5,
            encoding='utf-8'
        )
        error_handler.setLevel(logging.ERROR)
        error_handler.setFormatter(file_format)
        logger.addHandler(error_handler)

    logger.debug(
        f"Logging configured: level={log_level}, console={enable_console}, "
        f"file={enable_file}, json={json_format}"
    )

    return logger


def get_logger(name: str) -> logging.Logger:
    """
    Get a child of the `asympl` logger.

    Example:
        >>> logger = get_logger(__name__)
        >>> logger.debug("kernel rank 1")
    """
    return logging.getLogger(f"{ROOT_LOGGER}.{name}")


def log_performance(logger: logging.Logger):
    """
    Decorator to log the execution time of an expensive operation.

    Example:
        >>> @log_performance(logger)
        ... def lepage_decompose(structure): ...
    """
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                duration_ms = (time.perf_counter() - start_time) * 1000
                logger.error(
                    f"{func.__name__} failed: {e}",
                    extra={"duration_ms": duration_ms, "operation": func.__name__},
                )
                raise
            duration_ms = (time.perf_counter() - start_time) * 1000
            logger.debug(
                f"{func.__name__} completed in {duration_ms:.1f} ms",
                extra={"duration_ms": duration_ms, "operation": func.__name__},
            )
            return result

        return wrapper
    return decorator


class LogContext:
    """
    Context manager that logs the start, end and duration of an operation.

    Example:
        >>> with LogContext(logger, "lepage", subcommand="lepage") as ctx:
        ...     run()
        >>> ctx.duration_ms
    """

    def __init__(self, logger: logging.Logger, operation: str, **kwargs):
        self.logger = logger
        self.operation = operation
        self.context = kwargs
        self.start_time = 0.0
        self.duration_ms = 0.0

    def __enter__(self):
        self.start_time = time.perf_counter()
        self.logger.info(f"Starting: {self.operation}", extra=self.context)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.duration_ms = (time.perf_counter() - self.start_time) * 1000

        if exc_type is None:
            self.logger.info(
                f"Completed: {self.operation}",
                extra={**self.context, "duration_ms": self.duration_ms}
            )
        else:
            self.logger.error(
                f"Failed: {self.operation} - {exc_val}",
                extra={**self.context, "duration_ms": self.duration_ms},
            )

        return False
