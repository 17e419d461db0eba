"""
Fitted parameters for classic and mode-based standardization.

ScaleConvention picks the denominator:
- STANDARD_ERROR      sigma / sqrt(n)  (the literal published form; default)
- STANDARD_DEVIATION  sigma            (the conventional z-score)
"""

from __future__ import annotations

import math
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator

MOMENT_TOLERANCE = 1e-12


class ScaleConvention(str, Enum):
    STANDARD_ERROR = "se"
    STANDARD_DEVIATION = "sd"


class ModeEstimate(BaseModel):
    """Most frequent value x* and its empirical probability p-hat."""

    model_config = ConfigDict(frozen=True)

    mode_value: float
    mode_prob: float = Field(ge=0.0, le=1.0)
    bin_width: float | None = Field(default=None, gt=0.0)


class StandardizationModel(BaseModel):
    """Everything needed to standardize values of one fitted dataset."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(gt=0)
    mean: float
    var_classic: float = Field(ge=0.0)
    phi: float
    var_mode: float = Field(ge=0.0)
    eta: float = Field(ge=0.0, le=1.0)
    mode_value: float
    mode_prob: float = Field(ge=0.0, le=1.0)
    bin_width: float | None = Field(default=None, gt=0.0)
    scale_convention: ScaleConvention = ScaleConvention.STANDARD_ERROR

    @model_validator(mode="after")
    def _check_moments(self) -> StandardizationModel:
        if self.mode_prob < self.eta and self.phi != self.mean:
            raise ValueError("phi must equal mean when mode_prob < eta")
        expected = self.var_classic + (self.mean - self.phi) ** 2
        tol = MOMENT_TOLERANCE * max(1.0, abs(expected))
        if abs(self.var_mode - expected) > tol:
            raise ValueError(
                f"var_mode {self.var_mode!r} inconsistent with var_classic + (mean - phi)^2 "
                f"= {expected!r}"
            )
        return self

    def _scale(self, variance: float) -> float:
        sigma = math.sqrt(variance)
        if self.scale_convention is ScaleConvention.STANDARD_ERROR:
            return sigma / math.sqrt(self.n)
        return sigma

    @property
    def classic_scale(self) -> float:
        return self._scale(self.var_classic)

    @property
    def mode_scale(self) -> float:
        return self._scale(self.var_mode)
