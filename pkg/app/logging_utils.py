"""
logging_utils.py
================

Reusable logging utilities for compacta.

This module:
- Uses a ContextVar-backed run_id to correlate every log line of one CLI run,
  including lines emitted from worker threads.
- Provides a logging Filter that injects `run_id` into every LogRecord.
- Exposes helpers to set/get/generate run IDs.
- Adds concise helpers for structured logging (`log_with_id`) and
  scoped block logging with timing (`log_context`).
- Includes `truncate_msg` to keep offending cell values readable in logs and
  error messages.

IMPORTANT
---------
This module does NOT configure the root logger; configure that in `main.py`
(handlers, formatter with `%(run_id)s`, levels, etc.).
"""

from __future__ import annotations

import contextvars
import logging
import time
import uuid
from collections.abc import Iterator
from contextlib import contextmanager
from typing import Any

# ---------------------------------------------------------------------------
# ContextVar for run-scoped correlation
# ---------------------------------------------------------------------------

# Carries the current run_id (or None). The CLI entrypoint sets it once per run.
_run_id_var: contextvars.ContextVar[str | None] = contextvars.ContextVar(
    "run_id", default=None
)


def get_run_id() -> str | None:
    """Return the current run_id from the context (or None if not set)."""
    return _run_id_var.get()


def set_run_id(run_id: str | None) -> None:
    """Set the current run_id in the context for correlation-aware logging."""
    _run_id_var.set(run_id)


def new_run_id() -> str:
    """Generate a short run_id (first block of a UUID4)."""
    return str(uuid.uuid4())[:8]


# ---------------------------------------------------------------------------
# Filter to inject run_id onto every LogRecord
# ---------------------------------------------------------------------------

class RunIdFilter(logging.Filter):
    """
    Logging filter that injects the current run_id into each LogRecord
    as `run_id`. If none is set, uses "-".
    """

    def filter(self, record: logging.LogRecord) -> bool:  # noqa: D401
        if not getattr(record, "run_id", None):
            rid = get_run_id()
            record.run_id = rid if rid else "-"
        return True


# ---------------------------------------------------------------------------
# Logger and structured logging helpers
# ---------------------------------------------------------------------------

_RESERVED = frozenset({
    "name", "msg", "args", "levelname", "levelno", "pathname",
    "filename", "module", "exc_info", "exc_text", "stack_info",
    "lineno", "funcName", "created", "msecs", "relativeCreated",
    "thread", "threadName", "processName", "process", "message",
})


def get_logger(name: str) -> logging.Logger:
    """
    Return a named logger. Handlers/formatters/levels are inherited from the
    root logger configured in `main.py`.
    """
    return logging.getLogger(name)


def _format_fields(fields: dict[str, Any]) -> str:
    return " ".join(f"{k}={v}" for k, v in fields.items())


def log_with_id(
    logger: logging.Logger,
    level: int | str,
    message: str,
    *,
    run_id: str | None = None,
    **extra: Any,
) -> None:
    """
    Log a message with a run_id and arbitrary structured fields.

    - If `run_id` is not provided, uses the ContextVar value.
    - Structured fields (stage=..., record_id=..., frames=...) are attached to
      the record via `extra` and appended to the message as key=value pairs so
      they survive plain-text formatters.
    - Reserved LogRecord attributes are ignored. In DEBUG mode, a warning is logged.
    """
    rid = run_id if run_id is not None else get_run_id()

    if isinstance(level, str):
        resolved = logging.getLevelName(level.upper())
        if not isinstance(resolved, int):
            logger.warning("Unknown log level %r, defaulting to INFO", level)
            resolved = logging.INFO
        level = resolved

    if not logger.isEnabledFor(level):
        return

    reserved_used = [k for k in extra if k in _RESERVED]
    if reserved_used:
        if logger.isEnabledFor(logging.DEBUG):
            logger.warning(
                "Ignoring reserved logging keys in extra: %s", ", ".join(reserved_used)
            )
        extra = {k: v for k, v in extra.items() if k not in _RESERVED}

    text = f"{message} {_format_fields(extra)}" if extra else message
    logger.log(level, text, extra={"run_id": rid or "-", **extra})


@contextmanager
def log_context(
    logger: logging.Logger,
    label: str,
    *,
    level: int = logging.INFO,
    run_id: str | None = None,
    **extra: Any,
) -> Iterator[None]:
    """
    Context manager that logs Start/End for a labeled block and measures elapsed time.

    Example:
        with log_context(logger, "slice", method="rrif"):
            ...  # do work

    Emits:
        - "Start: slice method=rrif"
        - "End: slice (elapsed=0.123s) method=rrif"
    """
    start = time.perf_counter()
    log_with_id(logger, level, f"Start: {label}", run_id=run_id, **extra)
    try:
        yield
    finally:
        elapsed = time.perf_counter() - start
        log_with_id(
            logger,
            level,
            f"End: {label} (elapsed={elapsed:.3f}s)",
            run_id=run_id,
            **extra,
        )


# ---------------------------------------------------------------------------
# Utility: keep very long strings readable in logs
# ---------------------------------------------------------------------------

def truncate_msg(msg: str, max_length: int = 80) -> str:
    """
    Truncate long strings for logging (offending CSV cells, config values).

    If `msg` exceeds `max_length`, returns the first max_length characters plus "...".
    """
    return msg if len(msg) <= max_length else f"{msg[:max_length]}..."


__all__ = [
    "get_run_id",
    "set_run_id",
    "new_run_id",
    "RunIdFilter",
    "get_logger",
    "log_with_id",
    "log_context",
    "truncate_msg",
]
