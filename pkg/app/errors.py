"""
Exception hierarchy for compacta.

Every domain failure maps to one CLI exit code:

- ConfigError   -> 2  (invalid or inconsistent run configuration)
- DataIOError   -> 3  (missing/unreadable/malformed input, unwritable output)
- NumericError  -> 4  (zero variance, invalid range, out-of-bounds anchors)

`StageError` wraps any of the above with the pipeline stage that raised it and
keeps the wrapped exit code, so `compacta run` can report "[peaks] ..." while
still exiting with the code of the underlying failure.
"""

from __future__ import annotations

from collections.abc import Sequence


class CompactaError(Exception):
    """Base class for all expected compacta failures."""

    exit_code: int = 1


class ConfigError(CompactaError, ValueError):
    """Configuration is unreadable or violates one or more rules.

    `violations` holds every rule that failed, not only the first.
    """

    exit_code = 2

    def __init__(self, message: str, violations: Sequence[str] | None = None) -> None:
        self.violations: tuple[str, ...] = tuple(violations or (message,))
        super().__init__(message)


class DataIOError(CompactaError, OSError):
    """Input file missing, empty or malformed; output path not writable."""

    exit_code = 3


class NumericError(CompactaError, ValueError):
    """Numerically invalid request (zero variance, range beyond the signal, ...)."""

    exit_code = 4


class StageError(CompactaError):
    """A pipeline stage failed; carries the stage name and the original error."""

    def __init__(self, stage: str, cause: CompactaError) -> None:
        self.stage = stage
        self.cause = cause
        self.exit_code = cause.exit_code
        super().__init__(f"[{stage}] {cause}")


__all__ = [
    "CompactaError",
    "ConfigError",
    "DataIOError",
    "NumericError",
    "StageError",
]
