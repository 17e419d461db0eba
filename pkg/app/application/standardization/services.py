"""
Classic and mode-based standardization.

Classic:     z = (x - mean) / scale(var_classic)
Mode-based:  w = (x - phi)  / scale(var_mode)

where phi is the revised mode (the empirical mode when its probability p-hat
reaches eta, otherwise the mean) and var_mode = E[(X - phi)^2], evaluated as
var_classic + (mean - phi)^2. Variances use the population form (divide by n).
"""

from __future__ import annotations

import logging
import math
from typing import Literal

import numpy as np
import numpy.typing as npt

from app.application.signals.entities import FrameSet
from app.application.standardization.entities import (
    ModeEstimate,
    ScaleConvention,
    StandardizationModel,
)
from app.application.standardization.policies import auto_bin_width, clamp_variance
from app.errors import NumericError
from app.logging_utils import get_logger, log_with_id

logger = get_logger(__name__)

BinWidth = float | Literal["auto"] | None
Scope = Literal["pooled", "frame"]


def _as_data(data: npt.ArrayLike) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise NumericError("cannot fit on empty data")
    if not np.isfinite(arr).all():
        raise NumericError("data contains non-finite values")
    return arr


def _resolve_bin_width(arr: np.ndarray, bin_width: BinWidth) -> float | None:
    if bin_width == "auto":
        return auto_bin_width(arr)
    if bin_width is None:
        return None
    width = float(bin_width)
    if not (math.isfinite(width) and width > 0):
        raise NumericError(f"bin_width must be a positive number, got {bin_width!r}")
    return width


def fit_classic(data: npt.ArrayLike) -> tuple[float, float]:
    """Return (mean, population variance) of `data`."""
    arr = _as_data(data)
    mean = float(np.mean(arr))
    var = float(np.mean((arr - mean) ** 2))
    return mean, var


def estimate_mode(data: npt.ArrayLike, bin_width: BinWidth = None) -> ModeEstimate:
    """
    Most frequent value and its empirical probability.

    With `bin_width=None` values are matched exactly. Otherwise value x falls
    in bin floor(x / bin_width) and the mode is the mean of the winning bin.
    Ties go to the smallest mode value. "auto" picks a Freedman-Diaconis width.
    """
    arr = _as_data(data)
    width = _resolve_bin_width(arr, bin_width)
    if width is None:
        values, counts = np.unique(arr, return_counts=True)
        winner = int(np.argmax(counts))
        mode_value = float(values[winner])
    else:
        _, inverse, counts = np.unique(
            np.floor(arr / width), return_inverse=True, return_counts=True
        )
        winner = int(np.argmax(counts))
        mode_value = float(np.mean(arr[inverse.reshape(-1) == winner]))
    return ModeEstimate(
        mode_value=mode_value,
        mode_prob=float(counts[winner]) / arr.size,
        bin_width=width,
    )


def _select_phi(estimate: ModeEstimate, mean: float, eta: float) -> float:
    return estimate.mode_value if estimate.mode_prob >= eta else mean


def _check_eta(eta: float) -> None:
    if not (0.0 <= eta <= 1.0):
        raise NumericError(f"eta out of [0,1]: {eta!r}")


def revised_mode(data: npt.ArrayLike, eta: float = 0.5, bin_width: BinWidth = None) -> float:
    """The mode when its probability reaches `eta`, otherwise the mean."""
    _check_eta(eta)
    arr = _as_data(data)
    mean, _ = fit_classic(arr)
    return _select_phi(estimate_mode(arr, bin_width), mean, eta)


def fit_mode_variance(data: npt.ArrayLike, phi: float) -> float:
    """Second moment of `data` about `phi`: E[X^2] - 2*mean*phi + phi^2."""
    mean, var = fit_classic(data)
    return clamp_variance(var + (mean - phi) ** 2, label="mode-based variance")


def fit_standardization(
    data: npt.ArrayLike,
    *,
    eta: float = 0.5,
    bin_width: BinWidth = "auto",
    scale_convention: ScaleConvention = ScaleConvention.STANDARD_ERROR,
) -> StandardizationModel:
    """Fit classic and mode-based parameters in one pass over `data`."""
    _check_eta(eta)
    arr = _as_data(data)
    mean, var_classic = fit_classic(arr)
    estimate = estimate_mode(arr, bin_width)
    phi = _select_phi(estimate, mean, eta)
    return StandardizationModel(
        n=int(arr.size),
        mean=mean,
        var_classic=var_classic,
        phi=phi,
        var_mode=fit_mode_variance(arr, phi),
        eta=eta,
        mode_value=estimate.mode_value,
        mode_prob=estimate.mode_prob,
        bin_width=estimate.bin_width,
        scale_convention=ScaleConvention(scale_convention),
    )


def _apply(values: npt.ArrayLike, center: float, scale: float) -> float | np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    out = (arr - center) / scale
    return float(out) if out.ndim == 0 else out


def standardize_classic(x: npt.ArrayLike, model: StandardizationModel) -> float | np.ndarray:
    """(x - mean) / scale(var_classic); scalar in, scalar out."""
    if model.var_classic <= 0:
        raise NumericError("cannot standardize: classic variance is zero")
    return _apply(x, model.mean, model.classic_scale)


def standardize_mode(x: npt.ArrayLike, model: StandardizationModel) -> float | np.ndarray:
    """(x - phi) / scale(var_mode); scalar in, scalar out."""
    if model.var_mode <= 0:
        raise NumericError("cannot standardize: mode-based variance is zero")
    return _apply(x, model.phi, model.mode_scale)


def destandardize_mode(w: npt.ArrayLike, model: StandardizationModel) -> float | np.ndarray:
    """Inverse of `standardize_mode`: w * scale(var_mode) + phi."""
    arr = np.asarray(w, dtype=np.float64)
    out = arr * model.mode_scale + model.phi
    return float(out) if out.ndim == 0 else out


def standardize_frameset(
    fs: FrameSet,
    *,
    model: StandardizationModel | None = None,
    eta: float = 0.5,
    bin_width: BinWidth = "auto",
    scale_convention: ScaleConvention = ScaleConvention.STANDARD_ERROR,
    scope: Scope = "pooled",
) -> tuple[FrameSet, list[StandardizationModel]]:
    """
    Apply mode-based standardization to every value of `fs`.

    - scope="pooled": one model fitted on all frame values together (or the
      supplied `model`), applied elementwise to every frame.
    - scope="frame":  one model per frame.

    Returns the standardized FrameSet and the models used (empty for an
    empty FrameSet).
    """
    if fs.frame_count == 0:
        return fs, []
    if scope == "frame":
        if model is not None:
            raise NumericError("a pre-fitted model can only be applied with pooled scope")
        models = [
            fit_standardization(
                row, eta=eta, bin_width=bin_width, scale_convention=scale_convention
            )
            for row in fs.frames
        ]
        out = np.vstack([standardize_mode(row, m) for row, m in zip(fs.frames, models)])
    else:
        pooled = model or fit_standardization(
            fs.frames, eta=eta, bin_width=bin_width, scale_convention=scale_convention
        )
        models = [pooled]
        out = standardize_mode(fs.frames, pooled)
    log_with_id(
        logger,
        logging.DEBUG,
        "frames_standardized",
        scope=scope,
        models=len(models),
        phi=models[0].phi,
        mode_prob=models[0].mode_prob,
    )
    return fs.with_frames(out), models
