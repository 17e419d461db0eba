"""Numerical rules used while fitting standardization models."""

from __future__ import annotations

import math

import numpy as np

from app.errors import NumericError

# Beyond this magnitude a negative variance means inconsistent inputs.
NEGATIVE_VARIANCE_LIMIT = 1e-9


def auto_bin_width(data: np.ndarray) -> float | None:
    """
    Freedman-Diaconis width 2 * IQR * n^(-1/3).

    Falls back to range / sqrt(n) when the IQR is zero, and returns None
    (exact matching) when every value is identical.
    """
    n = data.size
    q75, q25 = np.percentile(data, [75.0, 25.0])
    width = 2.0 * float(q75 - q25) * n ** (-1.0 / 3.0)
    if width > 0 and math.isfinite(width):
        return width
    spread = float(np.ptp(data))
    if spread > 0 and math.isfinite(spread):
        return spread / math.sqrt(n)
    return None


def clamp_variance(value: float, label: str = "variance") -> float:
    """Clamp tiny negative round-off to 0; reject clearly negative results."""
    if value < -NEGATIVE_VARIANCE_LIMIT:
        raise NumericError(f"{label} is negative ({value!r}); inputs are inconsistent")
    return max(value, 0.0)
