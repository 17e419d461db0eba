"""
Domain types shared by every compacta stage.

- Signal:           one uniformly sampled, single-lead waveform with its sampling rate.
- PeakList:         strictly increasing anchor indices (R-peaks) within one Signal.
- FrameSet:         the compact dataset, a rectangular (frame_count x frame_length)
                    matrix plus per-frame provenance and optional labels.
- ConfusionSummary: accepted/total counts and confusion-matrix accuracy feeding
                    the overall-performance metric.

Array-carrying types are frozen dataclasses whose numpy buffers are made
read-only after validation, so instances can be shared between threads.
Scalar value objects are frozen Pydantic models.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.errors import NumericError


class Method(str, Enum):
    """Slicing strategy that produced a frame (written verbatim to CSV)."""

    TIME_SLICE = "TIME_SLICE"
    RRIF = "RRIF"
    FIXED = "FIXED"


def _frozen_array(values: npt.ArrayLike, dtype: type) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Signal:
    """Raw input record. Samples are float64 and always finite."""

    samples: np.ndarray
    sampling_rate_hz: float
    record_id: str = "record"

    def __post_init__(self) -> None:
        if not (np.isfinite(self.sampling_rate_hz) and self.sampling_rate_hz > 0):
            raise ValueError(f"sampling_rate_hz must be > 0, got {self.sampling_rate_hz!r}")
        samples = _frozen_array(self.samples, np.float64)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional (single lead)")
        if samples.size == 0:
            raise ValueError("samples must not be empty")
        if not np.isfinite(samples).all():
            bad = int(np.flatnonzero(~np.isfinite(samples))[0])
            raise ValueError(f"non-finite sample at index {bad}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sampling_rate_hz", float(self.sampling_rate_hz))

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration_s(self) -> float:
        return len(self) / self.sampling_rate_hz

    def seconds_to_samples(self, seconds: float) -> int:
        """Convert a duration to a sample count, rounding ties to even."""
        return round(seconds * self.sampling_rate_hz)


@dataclass(frozen=True, eq=False)
class PeakList:
    """Anchor positions; strictly increasing, 0-based, possibly empty."""

    indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    source_record_id: str = "record"

    def __post_init__(self) -> None:
        indices = _frozen_array(self.indices, np.int64).reshape(-1)
        if indices.size and indices[0] < 0:
            raise ValueError("peak indices must be non-negative")
        if indices.size > 1 and not (np.diff(indices) > 0).all():
            row = int(np.flatnonzero(np.diff(indices) <= 0)[0]) + 2
            raise ValueError(f"peak indices non-increasing at position {row}")
        object.__setattr__(self, "indices", indices)

    def __len__(self) -> int:
        return int(self.indices.size)

    def check_within(self, sig: Signal) -> None:
        """Raise NumericError when any index falls outside `sig`."""
        if self.indices.size and self.indices[-1] >= len(sig):
            raise NumericError(
                f"peak index {int(self.indices[-1])} outside signal "
                f"'{sig.record_id}' of length {len(sig)}"
            )


class Provenance(NamedTuple):
    """Where a frame came from."""

    record_id: str
    anchor_index: int
    method: Method


@dataclass(frozen=True, eq=False)
class FrameSet:
    """The compact dataset. Rows always share `frame_length` (rectangularity)."""

    frames: np.ndarray
    frame_length: int
    provenance: tuple[Provenance, ...] = ()
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.frame_length < 1:
            raise ValueError(f"frame_length must be positive, got {self.frame_length}")
        frames = _frozen_array(self.frames, np.float64)
        if frames.size == 0:
            frames = _frozen_array(np.empty((0, self.frame_length)), np.float64)
        if frames.ndim != 2 or frames.shape[1] != self.frame_length:
            raise ValueError(
                f"frames must have shape (n, {self.frame_length}), got {frames.shape}"
            )
        provenance = tuple(Provenance(str(r), int(a), Method(m)) for r, a, m in self.provenance)
        if len(provenance) != frames.shape[0]:
            raise ValueError(
                f"provenance has {len(provenance)} entries for {frames.shape[0]} frames"
            )
        labels = self.labels
        if labels is not None:
            labels = tuple(str(x) for x in labels)
            if len(labels) != frames.shape[0]:
                raise ValueError(f"labels has {len(labels)} entries for {frames.shape[0]} frames")
            if any(not x for x in labels):
                raise ValueError("labels must be non-empty strings; use labels=None for none")
            if not labels:
                labels = None
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "frame_length", int(self.frame_length))
        object.__setattr__(self, "provenance", provenance)
        object.__setattr__(self, "labels", labels)

    @property
    def frame_count(self) -> int:
        return int(self.frames.shape[0])

    @property
    def value_count(self) -> int:
        return int(self.frames.size)

    @classmethod
    def empty(cls, frame_length: int) -> FrameSet:
        return cls(frames=np.empty((0, frame_length)), frame_length=frame_length)

    @classmethod
    def concat(cls, parts: Sequence[FrameSet], frame_length: int | None = None) -> FrameSet:
        """Stack frame sets in the given order. All parts must share a frame length."""
        if not parts:
            if frame_length is None:
                raise ValueError("frame_length is required to concatenate zero frame sets")
            return cls.empty(frame_length)
        length = parts[0].frame_length if frame_length is None else frame_length
        mismatched = [p.frame_length for p in parts if p.frame_length != length]
        if mismatched:
            raise NumericError(
                f"cannot concatenate frame sets of lengths {length} and {mismatched[0]}"
            )
        has_labels = [p.labels is not None for p in parts if p.frame_count]
        labels: tuple[str, ...] | None = None
        if has_labels and all(has_labels):
            labels = tuple(label for p in parts for label in (p.labels or ()))
        return cls(
            frames=np.vstack([p.frames for p in parts]),
            frame_length=length,
            provenance=tuple(prov for p in parts for prov in p.provenance),
            labels=labels,
        )

    def with_frames(self, frames: npt.ArrayLike) -> FrameSet:
        """Same provenance and labels, new values (e.g. after standardization)."""
        return FrameSet(
            frames=frames,
            frame_length=self.frame_length,
            provenance=self.provenance,
            labels=self.labels,
        )


class ConfusionSummary(BaseModel):
    """Inputs to the overall-performance metric."""

    model_config = ConfigDict(frozen=True)

    accuracy: float = Field(ge=0.0, le=1.0, description="Confusion-matrix accuracy.")
    accepted_count: int = Field(ge=0, description="Number of accepted data samples.")
    total_count: int = Field(gt=0, description="Total number of data samples.")

    @model_validator(mode="after")
    def _accepted_within_total(self) -> ConfusionSummary:
        if self.accepted_count > self.total_count:
            raise ValueError(
                f"accepted_count {self.accepted_count} exceeds total_count {self.total_count}"
            )
        return self
