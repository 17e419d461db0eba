"""Parameters of the three slicing strategies."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class TimeSliceConfig(BaseModel):
    """Window of `window_s` seconds starting at every anchor peak."""

    model_config = ConfigDict(frozen=True)

    window_s: float = Field(gt=0.0, allow_inf_nan=False)


class RRIFConfig(BaseModel):
    """Every peak-to-peak interval resampled to `frame_length` points."""

    model_config = ConfigDict(frozen=True)

    frame_length: int = Field(ge=2)


class FixedSliceConfig(BaseModel):
    """One retained range per record, `duration_s` seconds from `start_s`."""

    model_config = ConfigDict(frozen=True)

    start_s: float = Field(default=0.0, ge=0.0, allow_inf_nan=False)
    duration_s: float = Field(gt=0.0, allow_inf_nan=False)
