"""
Consistency rules for run configurations.

These rules work on plain mappings so `validate_config` can evaluate them on
the raw key=value input (alongside per-field validation) and report every
violation at once; `SliceJob`/`PipelineConfig` apply the same rules to
programmatically built configs.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from typing import Any

METHODS: tuple[str, ...] = ("time_slice", "rrif", "fixed")

# method -> (required parameters, optional parameters)
METHOD_PARAMS: dict[str, tuple[frozenset[str], frozenset[str]]] = {
    "time_slice": (frozenset({"window_s"}), frozenset()),
    "rrif": (frozenset({"frame_length"}), frozenset()),
    "fixed": (frozenset({"duration_s"}), frozenset({"start_s"})),
}
SLICING_PARAMS: frozenset[str] = frozenset().union(
    *(req | opt for req, opt in METHOD_PARAMS.values())
)
DETECTION_PARAMS: tuple[str, ...] = ("min_height", "refractory_s")
CONFUSION_KEYS: tuple[str, ...] = ("accepted_count", "total_count", "accuracy")

_TRUE = {"1", "true", "yes", "on"}


def is_true(value: Any) -> bool:
    if isinstance(value, str):
        return value.strip().lower() in _TRUE
    return bool(value)


def split_list(value: Any) -> list[str]:
    """Comma-separated text or a sequence -> list of non-empty strings."""
    if value is None:
        return []
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    if isinstance(value, Iterable):
        return [str(item) for item in value]
    return [str(value)]


def _present(values: Mapping[str, Any], key: str) -> bool:
    value = values.get(key)
    return value is not None and str(value).strip() not in {"", "NA"}


def slicing_violations(values: Mapping[str, Any]) -> list[str]:
    """Method/parameter and record-list rules shared by every slicing run."""
    errors: list[str] = []
    method = values.get("method")
    if method not in METHOD_PARAMS:
        return errors  # reported by field validation

    required, optional = METHOD_PARAMS[method]
    for param in sorted(required):
        if not _present(values, param):
            errors.append(f"{param} required for {method}")
    for param in sorted(SLICING_PARAMS - required - optional):
        if _present(values, param):
            errors.append(f"{param} not valid for {method}")

    has_peaks = _present(values, "peaks")
    detect = is_true(values.get("detect_peaks", False))
    if method == "fixed":
        if has_peaks:
            errors.append("peaks not valid for fixed")
        if detect:
            errors.append("detect_peaks not valid for fixed")
    elif not (has_peaks or detect):
        errors.append(f"peaks or detect_peaks=true required for {method}")
    if not detect:
        errors.extend(
            f"{param} only valid with detect_peaks=true"
            for param in DETECTION_PARAMS
            if _present(values, param)
        )

    signals = split_list(values.get("signal"))
    for key in ("peaks", "record_id"):
        items = split_list(values.get(key))
        if items and signals and len(items) != len(signals):
            errors.append(f"{key} lists {len(items)} entries for {len(signals)} signal(s)")
    return errors


def confusion_violations(values: Mapping[str, Any]) -> list[str]:
    """The confusion summary is all three keys or none."""
    given = [key for key in CONFUSION_KEYS if _present(values, key)]
    if not given:
        return []
    if len(given) != len(CONFUSION_KEYS):
        missing = ", ".join(k for k in CONFUSION_KEYS if k not in given)
        return [f"confusion summary incomplete: missing {missing}"]
    try:
        if int(values["accepted_count"]) > int(values["total_count"]):
            return ["accepted_count exceeds total_count"]
    except (TypeError, ValueError):
        pass  # reported by field validation
    return []


def model_io_violations(values: Mapping[str, Any], *, standardize: bool = True) -> list[str]:
    """Model files only make sense for a single pooled model."""
    errors: list[str] = []
    scope = str(values.get("standardize_scope") or "pooled")
    for key in ("model_in", "model_out"):
        if not _present(values, key):
            continue
        if not standardize:
            errors.append(f"{key} not valid when standardize=false")
        elif scope == "frame":
            errors.append(f"{key} requires standardize_scope=pooled")
    return errors


def output_violations(values: Mapping[str, Any], keys: Sequence[str]) -> list[str]:
    """Two outputs of one run must not share a path."""
    errors: list[str] = []
    seen: dict[str, str] = {}
    for key in keys:
        if not _present(values, key):
            continue
        path = str(values[key]).strip()
        if path in seen:
            errors.append(f"{key} and {seen[path]} point to the same file")
        else:
            seen[path] = key
    return errors


def pipeline_violations(values: Mapping[str, Any]) -> list[str]:
    """Slicing rules plus standardization/metrics rules of a full run."""
    standardize = is_true(values["standardize"]) if _present(values, "standardize") else True
    return [
        *slicing_violations(values),
        *confusion_violations(values),
        *model_io_violations(values, standardize=standardize),
        *output_violations(values, ("out", "report", "report_csv", "model_out")),
    ]


def standardize_job_violations(values: Mapping[str, Any]) -> list[str]:
    """Rules of a stand-alone `standardize` run."""
    return [
        *model_io_violations(values),
        *output_violations(values, ("out", "model_out")),
    ]


def metrics_job_violations(values: Mapping[str, Any]) -> list[str]:
    """Rules of a stand-alone `metrics` run."""
    return [
        *confusion_violations(values),
        *output_violations(values, ("report", "report_csv")),
    ]


def parse_overrides(pairs: Sequence[str]) -> tuple[dict[str, str], list[str]]:
    """Parse `--set key=value` flags."""
    values: dict[str, str] = {}
    errors: list[str] = []
    for pair in pairs:
        key, sep, value = pair.partition("=")
        key = key.strip().lower()
        if not sep or not key:
            errors.append(f"--set expects key=value, got '{pair}'")
            continue
        values[key] = value.strip()
    return values, errors
