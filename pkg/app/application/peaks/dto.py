"""Configuration for the built-in anchor peak detector."""

from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field


class PeakDetectConfig(BaseModel):
    """Absolute height threshold plus greedy refractory suppression."""

    model_config = ConfigDict(frozen=True)

    min_height: float = Field(default=0.0, allow_inf_nan=False)
    refractory_s: float = Field(default=0.0, ge=0.0, allow_inf_nan=False)

    def refractory_samples(self, sampling_rate_hz: float) -> int:
        """Minimum gap in samples, ceil(refractory_s * fs) with a 1e-9 tolerance."""
        return max(0, math.ceil(self.refractory_s * sampling_rate_hz - 1e-9))
