"""
Slicing strategies that turn a long record into a rectangular FrameSet.

- time_slice:  a fixed window starting at each anchor peak. Windows that run
               past the end of the record are dropped, never padded; windows
               of close peaks may overlap.
- rr_frame:    each interval [p_k, p_{k+1}) resampled to L points by linear
               interpolation with both end samples hit exactly.
- fixed_slice: a single retained range [S, S+D) per record.

Second-to-sample conversions use round() (ties to even).
"""

from __future__ import annotations

import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from app.application.signals.entities import FrameSet, Method, PeakList, Provenance, Signal
from app.application.slicing.dto import FixedSliceConfig, RRIFConfig, TimeSliceConfig
from app.errors import NumericError
from app.logging_utils import get_logger, log_with_id

logger = get_logger(__name__)


def _provenance(record_id: str, anchors: np.ndarray, method: Method) -> tuple[Provenance, ...]:
    return tuple(Provenance(record_id, a, method) for a in anchors.tolist())


def time_slice(sig: Signal, peaks: PeakList, cfg: TimeSliceConfig) -> FrameSet:
    """
    Cut `samples[p : p + W]` for every peak p with p + W <= len(signal).

    Raises:
        NumericError: when W < 1, W exceeds the record length, or a peak lies
            outside the record.
    """
    n = len(sig)
    width = sig.seconds_to_samples(cfg.window_s)
    if width < 1:
        raise NumericError(f"window of {cfg.window_s}s is shorter than one sample")
    if width > n:
        raise NumericError(
            f"window of {width} samples exceeds record '{sig.record_id}' of {n} samples"
        )
    peaks.check_within(sig)

    anchors = peaks.indices[peaks.indices + width <= n]
    frames = sliding_window_view(sig.samples, width)[anchors]
    log_with_id(
        logger,
        logging.DEBUG,
        "time_slice",
        record_id=sig.record_id,
        window=width,
        peaks=len(peaks),
        frames=int(anchors.size),
    )
    return FrameSet(
        frames=frames,
        frame_length=width,
        provenance=_provenance(sig.record_id, anchors, Method.TIME_SLICE),
    )


def rr_frame(sig: Signal, peaks: PeakList, cfg: RRIFConfig) -> FrameSet:
    """
    Resample every RR segment to exactly `cfg.frame_length` points.

    Output point j of the segment starting at p_k maps to source position
    p_k + j * (m - 1) / (L - 1), where m = p_{k+1} - p_k. When m == L the
    positions are integral and the segment is reproduced verbatim.

    Raises:
        NumericError: when a segment has fewer than 2 samples or a peak lies
            outside the record.
    """
    length = cfg.frame_length
    peaks.check_within(sig)
    if len(peaks) < 2:
        return FrameSet.empty(length)

    starts = peaks.indices[:-1]
    spans = np.diff(peaks.indices)
    short = np.flatnonzero(spans < 2)
    if short.size:
        k = int(short[0])
        raise NumericError(
            f"RR segment starting at {int(starts[k])} in record '{sig.record_id}' "
            f"has {int(spans[k])} sample(s); at least 2 are required"
        )

    steps = np.arange(length, dtype=np.float64)
    positions = starts[:, None] + (steps[None, :] * (spans[:, None] - 1)) / (length - 1)
    grid = np.arange(len(sig), dtype=np.float64)
    frames = np.interp(positions.ravel(), grid, sig.samples).reshape(positions.shape)
    log_with_id(
        logger,
        logging.DEBUG,
        "rr_frame",
        record_id=sig.record_id,
        frame_length=length,
        frames=int(starts.size),
    )
    return FrameSet(
        frames=frames,
        frame_length=length,
        provenance=_provenance(sig.record_id, starts, Method.RRIF),
    )


def fixed_slice(sig: Signal, cfg: FixedSliceConfig) -> FrameSet:
    """
    Keep the single range `samples[S : S + D]` of the record.

    Raises:
        NumericError: when D < 1 or the range extends past the record end.
    """
    start = sig.seconds_to_samples(cfg.start_s)
    duration = sig.seconds_to_samples(cfg.duration_s)
    n = len(sig)
    if duration < 1:
        raise NumericError(f"duration of {cfg.duration_s}s is shorter than one sample")
    if start + duration > n:
        raise NumericError(
            f"range [{start}, {start + duration}) exceeds record '{sig.record_id}' "
            f"of {n} samples"
        )
    return FrameSet(
        frames=sig.samples[start : start + duration][None, :],
        frame_length=duration,
        provenance=(Provenance(sig.record_id, start, Method.FIXED),),
    )
