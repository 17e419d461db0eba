"""
Run configurations.

`SliceJob` describes ingestion -> peaks -> slicing -> FrameSet file (the
`slice` sub-command). `PipelineConfig` extends it with standardization,
metrics and report outputs (the `run` sub-command). `PeaksJob`,
`StandardizeJob` and `MetricsJob` back the single-stage sub-commands.

All of them are built from flat key=value input: comma-separated lists,
"true"/"false" flags and "NA"/empty values for unset keys are accepted.
Unknown keys are rejected.
"""

from __future__ import annotations

from collections.abc import Mapping
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.application.peaks.dto import PeakDetectConfig
from app.application.pipeline.policies import (
    metrics_job_violations,
    pipeline_violations,
    slicing_violations,
    split_list,
    standardize_job_violations,
)
from app.application.signals.entities import ConfusionSummary
from app.application.slicing.dto import FixedSliceConfig, RRIFConfig, TimeSliceConfig
from app.application.standardization.entities import ScaleConvention
from app.application.standardization.services import BinWidth
from app.config import get_settings

MethodName = Literal["time_slice", "rrif", "fixed"]

_FLAT = ConfigDict(extra="forbid", frozen=True)


class FlatConfig(BaseModel):
    """Base for configs parsed from key=value text.

    Subclasses override `rules`, which checks cross-field consistency on a
    plain mapping so the same rules run on raw input and on built configs.
    """

    model_config = _FLAT

    @field_validator("*", mode="before")
    @classmethod
    def _blank_is_unset(cls, v: Any) -> Any:
        if isinstance(v, str) and v.strip() in {"", "NA"}:
            return None
        return v

    @model_validator(mode="after")
    def _consistency(self) -> FlatConfig:
        errors = self._violations()
        if errors:
            raise ValueError("; ".join(errors))
        return self

    @staticmethod
    def rules(values: Mapping[str, Any]) -> list[str]:
        return []

    def _violations(self) -> list[str]:
        return self.rules(self.model_dump(exclude_none=True))


class StandardizeParams(BaseModel):
    model_config = _FLAT

    eta: float = Field(default_factory=lambda: get_settings().default_eta)
    bin_width: float | Literal["auto", "exact"] = "auto"
    scale_convention: ScaleConvention = ScaleConvention.STANDARD_ERROR
    standardize_scope: Literal["pooled", "frame"] = "pooled"
    model_in: Path | None = None
    model_out: Path | None = None

    @field_validator("eta")
    @classmethod
    def _eta_range(cls, v: float) -> float:
        if not (0.0 <= v <= 1.0):
            raise ValueError("eta out of [0,1]")
        return v

    @field_validator("bin_width")
    @classmethod
    def _positive_width(cls, v: float | str) -> float | str:
        if isinstance(v, float) and not v > 0:
            raise ValueError("bin_width must be > 0, 'auto' or 'exact'")
        return v

    @property
    def resolved_bin_width(self) -> BinWidth:
        """"exact" means no binning (None); "auto" and widths pass through."""
        return None if self.bin_width == "exact" else self.bin_width


class MetricsParams(BaseModel):
    model_config = _FLAT

    epsilon: float = Field(
        default_factory=lambda: get_settings().default_epsilon, gt=0.0, allow_inf_nan=False
    )
    k_sigma: float = Field(
        default_factory=lambda: get_settings().default_k_sigma, gt=0.0, allow_inf_nan=False
    )
    metrics_level: Literal["sample", "frame"] = "sample"
    references: Path | None = None

    accepted_count: int | None = Field(default=None, ge=0)
    total_count: int | None = Field(default=None, gt=0)
    accuracy: float | None = Field(default=None, ge=0.0, le=1.0)

    def confusion_summary(self) -> ConfusionSummary | None:
        if self.accepted_count is None or self.total_count is None or self.accuracy is None:
            return None
        return ConfusionSummary(
            accepted_count=self.accepted_count,
            total_count=self.total_count,
            accuracy=self.accuracy,
        )


class SliceJob(FlatConfig):
    """Everything needed to turn one or more records into a FrameSet file."""

    method: MethodName
    fs: float = Field(gt=0.0, allow_inf_nan=False, description="Sampling rate in Hz.")
    signal: tuple[Path, ...] = Field(min_length=1)
    peaks: tuple[Path, ...] | None = None
    record_id: tuple[str, ...] | None = None
    out: Path

    detect_peaks: bool = False
    min_height: float | None = Field(default=None, allow_inf_nan=False)
    refractory_s: float | None = Field(default=None, ge=0.0, allow_inf_nan=False)

    window_s: float | None = Field(default=None, gt=0.0, allow_inf_nan=False)
    frame_length: int | None = Field(default=None, ge=2)
    start_s: float | None = Field(default=None, ge=0.0, allow_inf_nan=False)
    duration_s: float | None = Field(default=None, gt=0.0, allow_inf_nan=False)

    workers: int | None = Field(default=None, ge=1)

    @field_validator("signal", "peaks", "record_id", mode="before")
    @classmethod
    def _split_lists(cls, v: Any) -> Any:
        items = split_list(v)
        return tuple(items) if items else None

    @staticmethod
    def rules(values: Mapping[str, Any]) -> list[str]:
        return slicing_violations(values)

    # --- derived stage configs ---

    def record_ids(self) -> list[str]:
        return list(self.record_id) if self.record_id else [p.stem for p in self.signal]

    def peak_paths(self) -> list[Path | None]:
        return list(self.peaks) if self.peaks else [None] * len(self.signal)

    def detect_config(self) -> PeakDetectConfig:
        return PeakDetectConfig(
            min_height=self.min_height if self.min_height is not None else 0.0,
            refractory_s=self.refractory_s if self.refractory_s is not None else 0.0,
        )

    def slicing_config(self) -> TimeSliceConfig | RRIFConfig | FixedSliceConfig:
        if self.method == "time_slice":
            return TimeSliceConfig(window_s=self.window_s)
        if self.method == "rrif":
            return RRIFConfig(frame_length=self.frame_length)
        return FixedSliceConfig(start_s=self.start_s or 0.0, duration_s=self.duration_s)

    def worker_count(self) -> int:
        return self.workers or get_settings().workers


class PipelineConfig(SliceJob, StandardizeParams, MetricsParams):
    """Full run: slicing, optional standardization, metrics and report."""

    report: Path
    report_csv: Path | None = None
    standardize: bool = True

    @staticmethod
    def rules(values: Mapping[str, Any]) -> list[str]:
        return pipeline_violations(values)


class PeaksJob(FlatConfig):
    """Detect anchor peaks on one record and write them as a peaks CSV."""

    signal: Path
    fs: float = Field(gt=0.0, allow_inf_nan=False)
    out: Path
    record_id: str | None = None
    min_height: float = Field(default=0.0, allow_inf_nan=False)
    refractory_s: float = Field(default=0.0, ge=0.0, allow_inf_nan=False)

    def detect_config(self) -> PeakDetectConfig:
        return PeakDetectConfig(min_height=self.min_height, refractory_s=self.refractory_s)


class StandardizeJob(FlatConfig, StandardizeParams):
    """Standardize an existing FrameSet file."""

    data: Path
    out: Path

    @staticmethod
    def rules(values: Mapping[str, Any]) -> list[str]:
        return standardize_job_violations(values)


class MetricsJob(FlatConfig, MetricsParams):
    """Score an existing FrameSet file and write the quality report."""

    data: Path
    report: Path
    report_csv: Path | None = None

    @staticmethod
    def rules(values: Mapping[str, Any]) -> list[str]:
        return metrics_job_violations(values)
