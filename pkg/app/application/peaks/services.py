"""
Anchor peak detection.

A sample is a candidate when it is a strict-left local maximum
(x[i] > x[i-1] and x[i] >= x[i+1]) at or above `min_height`; the leftmost
sample of a flat top therefore wins. Candidates are then accepted greedily
left to right, dropping any that falls within the refractory gap of the last
accepted peak. The first and last samples are never candidates.
"""

from __future__ import annotations

import logging

import numpy as np

from app.application.peaks.dto import PeakDetectConfig
from app.application.signals.entities import PeakList, Signal
from app.errors import NumericError
from app.logging_utils import get_logger, log_with_id

logger = get_logger(__name__)


def _local_maxima(x: np.ndarray, min_height: float) -> np.ndarray:
    mid = x[1:-1]
    mask = (mid > x[:-2]) & (mid >= x[2:]) & (mid >= min_height)
    return np.flatnonzero(mask) + 1


def _suppress_refractory(candidates: np.ndarray, min_gap: int) -> np.ndarray:
    if min_gap <= 1 or candidates.size < 2:
        # strictly increasing candidates already satisfy a gap of 1
        return candidates
    kept: list[int] = []
    last = None
    for idx in candidates.tolist():
        if last is None or idx - last >= min_gap:
            kept.append(idx)
            last = idx
    return np.asarray(kept, dtype=np.int64)


def detect_peaks(sig: Signal, cfg: PeakDetectConfig) -> PeakList:
    """
    Detect anchor peaks in `sig`.

    Raises:
        NumericError: if the signal has fewer than 3 samples.
    """
    if len(sig) < 3:
        raise NumericError(
            f"peak detection needs at least 3 samples, record '{sig.record_id}' has {len(sig)}"
        )
    candidates = _local_maxima(sig.samples, cfg.min_height)
    min_gap = cfg.refractory_samples(sig.sampling_rate_hz)
    peaks = _suppress_refractory(candidates, min_gap)
    log_with_id(
        logger,
        logging.DEBUG,
        "peaks_detected",
        record_id=sig.record_id,
        candidates=int(candidates.size),
        accepted=int(peaks.size),
        min_gap=min_gap,
    )
    return PeakList(indices=peaks, source_record_id=sig.record_id)
