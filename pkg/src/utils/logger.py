import json
import logging
import sys
from datetime import datetime, timezone
from typing import Any, Optional
import os

_RESERVED_RECORD_KEYS = frozenset([
    "name", "msg", "args", "created", "filename", "funcName",
    "levelname", "levelno", "lineno", "module", "msecs",
    "message", "pathname", "process", "processName",
    "relativeCreated", "thread", "threadName", "exc_info",
    "exc_text", "stack_info", "taskName", "asctime",
])

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def parse_level(level: str) -> int:
    """Numeric level for a level name, case-insensitive."""
    name = level.strip().upper()
    if name not in LOG_LEVELS:
        raise ValueError(f"unknown log level {level!r}, expected one of {', '.join(LOG_LEVELS)}")
    return getattr(logging, name)


class JSONFormatter(logging.Formatter):
    def __init__(self, include_extra: bool = True):
        super().__init__()
        self.include_extra = include_extra

    def format(self, record: logging.LogRecord) -> str:
        log_data = {
            "timestamp": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        if self.include_extra:
            extra_fields = {
                key: value
                for key, value in record.__dict__.items()
                if key not in _RESERVED_RECORD_KEYS
            }
            if extra_fields:
                log_data["extra"] = extra_fields

        run_id = os.getenv("RAILPOWER_RUN_ID")
        if run_id:
            log_data["run_id"] = run_id

        return json.dumps(log_data, default=str)


class TextFormatter(logging.Formatter):
    """Human readable lines with the context appended as key=value pairs"""

    def __init__(self):
        super().__init__("%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    def format(self, record: logging.LogRecord) -> str:
        line = super().format(record)
        context = {
            key: value
            for key, value in record.__dict__.items()
            if key not in _RESERVED_RECORD_KEYS
        }
        if context:
            line += " | " + " ".join(f"{key}={value}" for key, value in context.items())
        return line


def _build_formatter(format_type: str) -> logging.Formatter:
    if format_type == "json":
        return JSONFormatter()
    return TextFormatter()


def get_logger(
        name: str,
        level: Optional[str] = None,
        format_type: Optional[str] = None
) -> logging.Logger:
    logger = logging.getLogger(name)

    if logger.handlers:
        return logger

    try:
        logger.setLevel(parse_level(level or os.getenv("LOG_LEVEL", "INFO")))
    except ValueError:
        logger.setLevel(logging.INFO)

    # stdout is reserved for CSV and reports
    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(logging.NOTSET)
    handler.setFormatter(_build_formatter(format_type or os.getenv("LOG_FORMAT", "json")))
    logger.addHandler(handler)

    logger.propagate = False
    return logger


def configure_logging(level: str, format_type: str) -> None:
    """Re-apply level and format to every logger created through get_logger.

    Raises:
        ValueError: If ``level`` is not a standard level name.
    """
    numeric_level = parse_level(level)
    formatter = _build_formatter(format_type)
    for logger in list(logging.Logger.manager.loggerDict.values()):
        if not isinstance(logger, logging.Logger) or logger.propagate:
            continue
        logger.setLevel(numeric_level)
        for handler in logger.handlers:
            handler.setFormatter(formatter)


def log_with_context(
        logger: logging.Logger,
        level: str,
        message: str,
        **context: Any
) -> None:
    log_method = getattr(logger, level.lower())
    log_method(message, extra=context)


def log_config_value(
        logger: logging.Logger,
        key: str,
        value: Any,
        provenance: str
) -> None:
    log_with_context(
        logger,
        "info",
        f"Resolved {key} from {provenance}",
        config_key=key,
        config_value=value,
        provenance=provenance,
    )


def log_performance_metric(
        logger: logging.Logger,
        operation: str,
        duration_ms: float,
        success: bool,
        **kwargs: Any
) -> None:
    log_with_context(
        logger,
        "info",
        f"Performance metric for {operation}",
        operation=operation,
        duration_ms=duration_ms,
        success=success,
        metric_type="performance",
        **kwargs
    )


class ContextLogger:
    def __init__(self, logger: logging.Logger, **default_context: Any):
        self.logger = logger
        self.default_context = default_context

    def _log(self, level: str, message: str, **context: Any) -> None:
        merged_context = {**self.default_context, **context}
        log_with_context(self.logger, level, message, **merged_context)

    def debug(self, message: str, **context: Any) -> None:
        self._log("debug", message, **context)

    def info(self, message: str, **context: Any) -> None:
        self._log("info", message, **context)

    def warning(self, message: str, **context: Any) -> None:
        self._log("warning", message, **context)

    def error(self, message: str, **context: Any) -> None:
        self._log("error", message, **context)


def create_context_logger(name: str, **default_context: Any) -> ContextLogger:
    logger = get_logger(name)
    return ContextLogger(logger, **default_context)
