"""
App entrypoint.

- `compacta` console script (see pyproject.toml) and `python -m app.main`.
- One run id per invocation, stamped on every log line (worker threads too).

This module also configures the root logger with:
- A formatter that includes %(run_id)s for correlation
- A RunIdFilter that injects run_id on every record
- The log level sourced from settings.log_level (or --log-level)
- Standard error as the only log destination; data goes to files
"""
from __future__ import annotations

import logging
import sys
from collections.abc import Sequence

from app.config import get_settings
from app.interfaces.cli.commands import execute, parse_args
from app.logging_utils import RunIdFilter, new_run_id, set_run_id


def configure_logging(level: str | None = None) -> None:
    """
    Configure the root logger with a run_id-aware formatter and filter.

    The RunIdFilter injects `run_id` into each LogRecord so the formatter can
    safely use %(run_id)s even before a run id is set (defaults to "-").
    """
    # Resolve level from the flag, then settings (fallback to INFO).
    if level:
        resolved = getattr(logging, level.upper(), logging.INFO)
    else:
        resolved = get_settings().log_level_int

    formatter = logging.Formatter(
        fmt="%(asctime)s | %(levelname)s | %(name)s.%(funcName)s | %(run_id)s | %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(formatter)
    handler.addFilter(RunIdFilter())

    root = logging.getLogger()
    root.handlers.clear()          # avoid duplicate handlers on repeated calls
    root.setLevel(resolved)
    root.addHandler(handler)


def main(argv: Sequence[str] | None = None) -> int:
    args = parse_args(argv)
    configure_logging(args.log_level)
    set_run_id(new_run_id())
    return execute(args)


if __name__ == "__main__":
    sys.exit(main())
