"""
File formats for compacta.

All readers/writers for the CSV and key=value artifacts live here so the
application layer never touches paths or parsers directly.

CSV conventions (shared by every reader):
- comma field separator, period decimal separator, UTF-8, LF line endings
- lines starting with '#' are comments and skipped
- row numbers in error messages are 1-based positions in the table as read
  (header row included, comment and blank lines excluded)

Formats:
- signal CSV:   one value per row, or (time, value) pairs; header optional
- peaks CSV:    one non-negative integer index per row; optional header "index"
- values CSV:   one numeric value per row (MAER references); header optional
- FrameSet CSV: header `record_id,anchor_index,method,label,v0..v{L-1}`, one row
                per frame; text cells and header names are always quoted; floats in
                shortest round-trip form, parsed back with pandas' round-trip float
                parser so write -> read is bit-exact
- key=value:    reports, fitted models and pipeline configs
"""

from __future__ import annotations

import csv
import io
import logging
import math
import re
from collections.abc import Iterable, Mapping
from pathlib import Path

import numpy as np
import pandas as pd

from app.application.metrics.entities import QualityReport
from app.application.signals.entities import FrameSet, Method, PeakList, Provenance, Signal
from app.application.standardization.entities import StandardizationModel
from app.errors import ConfigError, DataIOError
from app.logging_utils import get_logger, log_with_id, truncate_msg

logger = get_logger(__name__)

FRAME_META_COLUMNS: tuple[str, ...] = ("record_id", "anchor_index", "method", "label")
MISSING = "NA"

_INTEGER = re.compile(r"[+-]?\d+")


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _require_file(path: str | Path, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise DataIOError(f"{what} file not found: {p}")
    return p


def _strip_comment_lines(text: str) -> str:
    """Drop lines starting with '#', leaving quoted multi-line cells alone."""
    kept: list[str] = []
    in_quotes = False
    for line in text.split("\n"):
        if not in_quotes and line.startswith("#"):
            continue
        kept.append(line)
        if line.count('"') % 2:
            in_quotes = not in_quotes
    return "\n".join(kept)


def _read_table(
    path: Path,
    what: str,
    *,
    empty_ok: bool = False,
    skipinitialspace: bool = True,
    **kwargs,
) -> pd.DataFrame:
    try:
        with path.open(encoding="utf-8", newline="") as fh:
            text = _strip_comment_lines(fh.read())
        return pd.read_csv(
            io.StringIO(text),
            skip_blank_lines=True,
            skipinitialspace=skipinitialspace,
            **kwargs,
        )
    except pd.errors.EmptyDataError as exc:
        if empty_ok:
            return pd.DataFrame()
        raise DataIOError(f"{what} file is empty: {path}") from exc
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise DataIOError(f"{what} file is malformed: {path}: {exc}") from exc
    except OSError as exc:
        raise DataIOError(f"cannot read {what} file {path}: {exc}") from exc


def _is_number(cell: object) -> bool:
    try:
        float(str(cell))
    except ValueError:
        return False
    return True


def _first_bad_row(column: pd.Series) -> int | None:
    """Position (0-based) of the first cell that is not a finite number."""
    coerced = pd.to_numeric(column, errors="coerce").to_numpy(dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(coerced))
    return int(bad[0]) if bad.size else None


def _numeric_column(path: Path, what: str, allow_pairs: bool) -> np.ndarray:
    """Read the value column of a 1- (or 2-) column numeric CSV."""
    table = _read_table(path, what, header=None, float_precision="round_trip")
    max_cols = 2 if allow_pairs else 1
    if table.shape[1] > max_cols:
        raise DataIOError(
            f"{what} file {path} has {table.shape[1]} columns; expected at most {max_cols}"
        )
    header_rows = 0
    first_row = table.iloc[0].tolist()
    if not all(pd.api.types.is_numeric_dtype(t) for t in table.dtypes) and not any(
        _is_number(c) for c in first_row
    ):
        header_rows = 1
        table = _read_table(path, what, header=0, float_precision="round_trip")

    column = table.iloc[:, -1]
    if column.empty:
        raise DataIOError(f"{what} file has no data rows: {path}")
    bad = _first_bad_row(column)
    if bad is not None:
        cell = truncate_msg(str(column.iloc[bad]), 40)
        raise DataIOError(
            f"{what} file {path}: non-numeric or non-finite value '{cell}' "
            f"at row {bad + 1 + header_rows}"
        )
    return column.to_numpy(dtype=np.float64)


def _write_text(path: str | Path, text: str) -> None:
    p = Path(path)
    try:
        with p.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataIOError(f"cannot write {p}: {exc}") from exc


def format_value(value: object) -> str:
    """Shortest round-trip text for floats, NA for None, str() otherwise."""
    if value is None:
        return MISSING
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "value"):  # enums
        return str(value.value)
    return str(value)


# ---------------------------------------------------------------------------
# Signals, peaks and reference values
# ---------------------------------------------------------------------------

def read_signal_csv(
    path: str | Path, sampling_rate_hz: float, record_id: str | None = None
) -> Signal:
    """
    Load a single-lead record.

    Raises:
        ConfigError: non-positive sampling rate.
        DataIOError: missing/empty file, non-numeric or non-finite cell.
    """
    if not (math.isfinite(sampling_rate_hz) and sampling_rate_hz > 0):
        raise ConfigError(f"sampling rate must be > 0, got {sampling_rate_hz!r}")
    p = _require_file(path, "signal")
    samples = _numeric_column(p, "signal", allow_pairs=True)
    log_with_id(logger, logging.DEBUG, "signal_loaded", path=str(p), samples=int(samples.size))
    return Signal(
        samples=samples,
        sampling_rate_hz=sampling_rate_hz,
        record_id=record_id or p.stem,
    )


def read_values_csv(path: str | Path, what: str = "references") -> np.ndarray:
    """One numeric column (header optional)."""
    return _numeric_column(_require_file(path, what), what, allow_pairs=False)


def read_peaks_csv(path: str | Path, record_id: str | None = None) -> PeakList:
    """
    Load annotated anchor indices. An empty file is an empty PeakList.

    Raises:
        DataIOError: non-integer, negative or non-increasing entries (row reported).
    """
    p = _require_file(path, "peaks")
    source = record_id or p.stem
    table = _read_table(p, "peaks", empty_ok=True, header=None, dtype=str)
    if table.empty:
        return PeakList(source_record_id=source)
    if table.shape[1] != 1:
        raise DataIOError(f"peaks file {p} has {table.shape[1]} columns; expected 1")

    cells = table.iloc[:, 0].astype(str).str.strip()
    offset = 1
    if len(cells) and cells.iloc[0].lower() == "index":
        cells = cells.iloc[1:]
        offset = 2

    previous: int | None = None
    indices: list[int] = []
    for pos, cell in enumerate(cells.tolist()):
        row = pos + offset
        if not _INTEGER.fullmatch(cell):
            raise DataIOError(f"peaks file {p}: non-integer '{truncate_msg(cell, 40)}' at row {row}")
        value = int(cell)
        if value < 0:
            raise DataIOError(f"peaks file {p}: negative index {value} at row {row}")
        if previous is not None and value <= previous:
            raise DataIOError(f"peaks file {p}: non-increasing at row {row}")
        indices.append(value)
        previous = value
    return PeakList(indices=np.asarray(indices, dtype=np.int64), source_record_id=source)


def write_peaks_csv(peaks: PeakList, path: str | Path) -> None:
    lines = ["index", *(str(i) for i in peaks.indices.tolist())]
    _write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# FrameSet
# ---------------------------------------------------------------------------

def _value_columns(length: int) -> list[str]:
    return [f"v{i}" for i in range(length)]


def write_frameset_csv(fs: FrameSet, path: str | Path) -> None:
    """One row per frame: record_id, anchor_index, method, label, values."""
    meta = pd.DataFrame(
        {
            "record_id": [p.record_id for p in fs.provenance],
            "anchor_index": np.asarray([p.anchor_index for p in fs.provenance], dtype=np.int64),
            "method": [p.method.value for p in fs.provenance],
            "label": list(fs.labels) if fs.labels is not None else [""] * fs.frame_count,
        }
    )
    values = pd.DataFrame(fs.frames, columns=_value_columns(fs.frame_length))
    table = pd.concat([meta, values], axis=1)
    try:
        table.to_csv(
            path,
            index=False,
            lineterminator="\n",
            encoding="utf-8",
            quoting=csv.QUOTE_NONNUMERIC,
        )
    except OSError as exc:
        raise DataIOError(f"cannot write frame set {path}: {exc}") from exc


def read_frameset_csv(path: str | Path) -> FrameSet:
    """
    Inverse of `write_frameset_csv`.

    Raises:
        DataIOError: missing/empty file, malformed header, bad cell, unknown method.
    """
    p = _require_file(path, "frame set")
    table = _read_table(
        p,
        "frame set",
        dtype={"record_id": str, "method": str, "label": str},
        skipinitialspace=False,
        keep_default_na=False,
        float_precision="round_trip",
    )
    columns = [str(c) for c in table.columns]
    length = len(columns) - len(FRAME_META_COLUMNS)
    if tuple(columns[: len(FRAME_META_COLUMNS)]) != FRAME_META_COLUMNS or length < 1:
        raise DataIOError(f"frame set file {p} has a malformed header")
    if columns[len(FRAME_META_COLUMNS):] != _value_columns(length):
        raise DataIOError(f"frame set file {p}: value columns must be v0..v{length - 1}")

    values = table.iloc[:, len(FRAME_META_COLUMNS):]
    for name in ["anchor_index", *values.columns]:
        bad = _first_bad_row(table[name])
        if bad is not None:
            raise DataIOError(f"frame set file {p}: bad value in column {name} at row {bad + 2}")
    if len(table) and not pd.api.types.is_integer_dtype(table["anchor_index"]):
        raise DataIOError(f"frame set file {p}: anchor_index must hold integers")

    provenance: list[Provenance] = []
    for pos, (rid, anchor, method) in enumerate(
        zip(table["record_id"], table["anchor_index"], table["method"])
    ):
        try:
            provenance.append(Provenance(str(rid), int(anchor), Method(method)))
        except ValueError as exc:
            raise DataIOError(
                f"frame set file {p}: unknown method '{truncate_msg(str(method), 20)}' "
                f"at row {pos + 2}"
            ) from exc

    raw_labels = [str(x) for x in table["label"]]
    present = [bool(x) for x in raw_labels]
    if any(present) and not all(present):
        raise DataIOError(f"frame set file {p}: labels must be set on every row or on none")

    return FrameSet(
        frames=values.to_numpy(dtype=np.float64).reshape(len(table), length),
        frame_length=length,
        provenance=tuple(provenance),
        labels=tuple(raw_labels) if raw_labels and all(present) else None,
    )


# ---------------------------------------------------------------------------
# key=value files: configs, reports and fitted models
# ---------------------------------------------------------------------------

def read_key_values(path: str | Path) -> tuple[dict[str, str], list[str]]:
    """
    Parse a flat key=value file.

    Returns the parsed mapping and every syntax violation found (malformed
    lines, empty keys, duplicates); keys are lower-cased.

    Raises:
        ConfigError: the file cannot be read.
    """
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config file {p}: {exc}") from exc
    values: dict[str, str] = {}
    errors: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower()
        if not sep or not key:
            errors.append(f"line {lineno}: expected key=value, got '{truncate_msg(line, 40)}'")
            continue
        if key in values:
            errors.append(f"line {lineno}: duplicate key '{key}'")
            continue
        values[key] = value.strip()
    return values, errors


def write_key_values(items: Iterable[tuple[str, object]], path: str | Path) -> None:
    _write_text(path, "".join(f"{k}={format_value(v)}\n" for k, v in items))


def write_report(report: QualityReport, path: str | Path) -> None:
    write_key_values(report.as_row().items(), path)


def write_report_csv(report: QualityReport, path: str | Path) -> None:
    row = {key: format_value(value) for key, value in report.as_row().items()}
    try:
        pd.DataFrame([row]).to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"cannot write report {path}: {exc}") from exc


def write_model(model: StandardizationModel, path: str | Path) -> None:
    write_key_values(model.model_dump().items(), path)


def read_model(path: str | Path) -> StandardizationModel:
    """Load a model written by `write_model`.

    Raises:
        DataIOError: missing file, malformed content or inconsistent parameters.
    """
    p = _require_file(path, "model")
    try:
        values, errors = read_key_values(p)
    except ConfigError as exc:
        raise DataIOError(str(exc)) from exc
    if errors:
        raise DataIOError(f"model file {p}: {errors[0]}")
    cleaned: Mapping[str, str | None] = {
        k: (None if v == MISSING else v) for k, v in values.items()
    }
    try:
        return StandardizationModel.model_validate(cleaned)
    except ValueError as exc:
        raise DataIOError(f"model file {p} is invalid: {exc}") from exc
