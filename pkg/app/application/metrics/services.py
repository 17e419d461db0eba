"""
Compact-data quality metrics.

- maer:  mean of |Y_n - mu_n| / (mu_n + epsilon)
- ucl:   mean + k_sigma * population standard deviation
- apr:   fraction of values inside the closed range [0, ucl]
- overall_performance: (accepted / total) * accuracy
"""

from __future__ import annotations

import logging
import math
from typing import Literal

import numpy as np
import numpy.typing as npt

from app.application.metrics.entities import (
    EMPTY_DATASET,
    NEGATIVE_REFERENCES,
    QualityReport,
)
from app.application.signals.entities import ConfusionSummary, FrameSet
from app.application.standardization.services import fit_classic
from app.errors import NumericError
from app.logging_utils import get_logger, log_with_id

logger = get_logger(__name__)

MetricsLevel = Literal["sample", "frame"]


def _as_values(data: npt.ArrayLike, name: str) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise NumericError(f"{name} must not be empty")
    return arr


def maer(observed: npt.ArrayLike, references: npt.ArrayLike, epsilon: float = 1e-9) -> float:
    """
    Mean absolute error rate of `observed` against `references`.

    Raises:
        NumericError: on empty or mismatched inputs, epsilon <= 0, or a
            zero denominator mu_n + epsilon.
    """
    if not (math.isfinite(epsilon) and epsilon > 0):
        raise NumericError(f"epsilon must be > 0, got {epsilon!r}")
    y = _as_values(observed, "observed")
    mu = _as_values(references, "references")
    if y.size != mu.size:
        raise NumericError(f"length mismatch: {y.size} observed vs {mu.size} references")
    denom = mu + epsilon
    zero = np.flatnonzero(denom == 0)
    if zero.size:
        raise NumericError(f"reference + epsilon is zero at position {int(zero[0]) + 1}")
    if (mu < 0).any():
        log_with_id(
            logger,
            logging.WARNING,
            "negative reference values make MAER a signed ratio",
            negatives=int((mu < 0).sum()),
        )
    return float(np.mean(np.abs(y - mu) / denom))


def ucl(data: npt.ArrayLike, k_sigma: float = 3.0) -> float:
    """Upper control limit mean + k_sigma * sigma (population form)."""
    if not (math.isfinite(k_sigma) and k_sigma > 0):
        raise NumericError(f"k_sigma must be > 0, got {k_sigma!r}")
    mean, var = fit_classic(_as_values(data, "data"))
    return mean + k_sigma * math.sqrt(var)


def _within(data: np.ndarray, ucl_value: float) -> int:
    return int(np.count_nonzero((data >= 0.0) & (data <= ucl_value)))


def apr(data: npt.ArrayLike, ucl_value: float) -> float:
    """Fraction of `data` inside [0, ucl_value], both ends included."""
    arr = _as_values(data, "data")
    return _within(arr, ucl_value) / arr.size


def overall_performance(cs: ConfusionSummary) -> float:
    """(accepted_count / total_count) * accuracy."""
    if cs.total_count == 0:
        raise NumericError("total_count must be positive")
    return (cs.accepted_count / cs.total_count) * cs.accuracy


def level_values(fs: FrameSet, level: MetricsLevel = "sample") -> np.ndarray:
    """Values the metrics run on: pooled frame values, or one mean per frame."""
    if level == "frame":
        return fs.frames.mean(axis=1) if fs.frame_count else np.empty(0)
    return fs.frames.reshape(-1)


def build_quality_report(
    fs: FrameSet,
    *,
    epsilon: float = 1e-9,
    k_sigma: float = 3.0,
    level: MetricsLevel = "sample",
    references: npt.ArrayLike | None = None,
    confusion: ConfusionSummary | None = None,
) -> QualityReport:
    """
    Score `fs`: APR against its own UCL, MAER when references are given, OP
    when a confusion summary is given. An empty FrameSet yields a report with
    the note "empty dataset" and no APR/UCL.
    """
    values = level_values(fs, level)
    notes: list[str] = []
    apr_value: float | None = None
    ucl_value: float | None = None
    within = 0
    if values.size:
        ucl_value = ucl(values, k_sigma)
        within = _within(values, ucl_value)
        apr_value = within / values.size
    else:
        notes.append(EMPTY_DATASET)

    maer_value: float | None = None
    if references is not None:
        refs = np.asarray(references, dtype=np.float64).reshape(-1)
        if refs.size != values.size:
            raise NumericError(
                f"references has {refs.size} values but the {level}-level data has {values.size}"
            )
        if values.size:
            maer_value = maer(values, refs, epsilon)
            if (refs < 0).any():
                notes.append(NEGATIVE_REFERENCES)

    op_value = overall_performance(confusion) if confusion is not None else None
    method = fs.provenance[0].method.value if fs.frame_count else None

    report = QualityReport(
        maer=maer_value,
        apr=apr_value,
        op=op_value,
        ucl=ucl_value,
        epsilon=epsilon,
        k_sigma=k_sigma,
        within_ucl=within,
        total=int(values.size),
        metrics_level=level,
        method=method,
        frame_count=fs.frame_count,
        frame_length=fs.frame_length,
        notes=tuple(notes),
    )
    log_with_id(
        logger,
        logging.INFO,
        "quality_report",
        apr=apr_value,
        maer=maer_value,
        op=op_value,
        total=report.total,
    )
    return report
