"""
Batch orchestration.

Stages run in a fixed order, each wrapped so any failure surfaces as a
`StageError` naming the stage and keeping the exit code of the cause:

    ingest -> peaks -> slice -> standardize -> metrics -> emit

Records of a multi-record run are sliced on a thread pool; frames are
concatenated in input record order. Outputs are written to hidden sibling
temporary files and renamed into place only once every stage succeeded, so a
failed run leaves no partial output behind.
"""

from __future__ import annotations

import contextvars
import logging
import os
from collections.abc import Callable, Iterator, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any, TypeVar

import numpy as np
from pydantic import ValidationError

from app.application.metrics.entities import QualityReport
from app.application.metrics.services import build_quality_report
from app.application.peaks.services import detect_peaks
from app.application.pipeline.dto import (
    FlatConfig,
    MetricsJob,
    PeaksJob,
    PipelineConfig,
    SliceJob,
    StandardizeJob,
    StandardizeParams,
)
from app.application.pipeline.policies import parse_overrides
from app.application.signals.entities import FrameSet, PeakList, Signal
from app.application.slicing.dto import FixedSliceConfig, RRIFConfig, TimeSliceConfig
from app.application.slicing.services import fixed_slice, rr_frame, time_slice
from app.application.standardization.entities import StandardizationModel
from app.application.standardization.services import standardize_frameset
from app.errors import CompactaError, ConfigError, DataIOError, NumericError, StageError
from app.infrastructure.storage.files import (
    read_frameset_csv,
    read_key_values,
    read_model,
    read_peaks_csv,
    read_signal_csv,
    read_values_csv,
    write_frameset_csv,
    write_model,
    write_peaks_csv,
    write_report,
    write_report_csv,
)
from app.logging_utils import get_logger, get_run_id, log_context, log_with_id, new_run_id

logger = get_logger(__name__)

ConfigT = TypeVar("ConfigT", bound=FlatConfig)

STAGES: tuple[str, ...] = ("ingest", "peaks", "slice", "standardize", "metrics", "emit")


@dataclass(frozen=True)
class PipelineResult:
    frameset: FrameSet
    report: QualityReport
    models: tuple[StandardizationModel, ...]
    outputs: tuple[Path, ...]


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

def _format_error(err: Mapping[str, Any]) -> str:
    loc = ".".join(str(part) for part in err["loc"])
    if err["type"] == "extra_forbidden":
        return f"unknown key '{loc}'"
    if err["type"] == "missing":
        return f"{loc} is required"
    msg = str(err["msg"]).removeprefix("Value error, ")
    return msg if msg.startswith(str(err["loc"][0])) else f"{loc}: {msg}"


def validate_values(
    values: Mapping[str, Any],
    model_cls: type[ConfigT],
    errors: Sequence[str] = (),
) -> ConfigT:
    """
    Build `model_cls` from flat key=value input, collecting every violation.

    Consistency rules are evaluated on the raw mapping next to per-field
    validation, so one call reports all problems rather than the first.

    Raises:
        ConfigError: with `violations` listing every problem found.
    """
    violations = [*errors, *model_cls.rules(values)]
    try:
        config = model_cls.model_validate(dict(values))
    except ValidationError as exc:
        for err in exc.errors():
            if err["loc"]:
                violations.append(_format_error(err))
            elif not violations:
                # model-level rules; normally already collected from the raw mapping
                violations.extend(str(err["msg"]).removeprefix("Value error, ").split("; "))
    else:
        if not violations:
            return config
    raise ConfigError(
        f"invalid configuration ({len(violations)} problem(s)): " + "; ".join(violations),
        violations,
    )


def validate_config(path: str | Path, overrides: Sequence[str] = ()) -> PipelineConfig:
    """
    Load a pipeline config file, apply `--set key=value` overrides (flags win)
    and validate it.

    Raises:
        ConfigError: unreadable file or any violation (all of them listed).
    """
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    values, errors = read_key_values(p)
    flags, flag_errors = parse_overrides(overrides)
    values.update(flags)
    config = validate_values(values, PipelineConfig, [*errors, *flag_errors])
    log_with_id(logger, logging.INFO, "config_loaded", path=str(p), method=config.method)
    return config


# ---------------------------------------------------------------------------
# Stage plumbing
# ---------------------------------------------------------------------------

@contextmanager
def _stage(name: str, **fields: Any) -> Iterator[None]:
    """Run a block as pipeline stage `name`; wrap failures in StageError."""
    if name not in STAGES:
        raise ValueError(f"unknown pipeline stage: {name}")
    try:
        with log_context(logger, name, level=logging.DEBUG, **fields):
            yield
    except StageError:
        raise
    except CompactaError as exc:
        raise StageError(name, exc) from exc
    except OSError as exc:
        raise StageError(name, DataIOError(str(exc))) from exc
    except ValueError as exc:
        raise StageError(name, NumericError(str(exc))) from exc


def _temp_path(path: Path, run_id: str) -> Path:
    return path.with_name(f".{path.name}.{run_id}.tmp")


def _remove(paths: Sequence[Path]) -> None:
    for path in paths:
        try:
            path.unlink(missing_ok=True)
        except OSError as exc:
            log_with_id(logger, logging.WARNING, "cleanup_failed", path=str(path), error=str(exc))


def _commit(writes: Sequence[tuple[Path, Callable[[Path], None]]]) -> tuple[Path, ...]:
    """
    Write every output to a temporary sibling, then rename all into place.

    On any failure the temporaries and the outputs already renamed by this
    call are removed before the error propagates.
    """
    run_id = get_run_id() or new_run_id()
    temps = [_temp_path(path, run_id) for path, _ in writes]
    committed: list[Path] = []
    try:
        for (_, writer), temp in zip(writes, temps):
            writer(temp)
        for (path, _), temp in zip(writes, temps):
            try:
                os.replace(temp, path)
            except OSError as exc:
                raise DataIOError(f"cannot write {path}: {exc}") from exc
            committed.append(path)
    except BaseException:
        _remove([*temps, *committed])
        raise
    return tuple(committed)


# ---------------------------------------------------------------------------
# Slicing
# ---------------------------------------------------------------------------

def slice_record(
    sig: Signal,
    peaks: PeakList | None,
    cfg: TimeSliceConfig | RRIFConfig | FixedSliceConfig,
) -> FrameSet:
    """Dispatch to the slicing strategy matching `cfg`."""
    if isinstance(cfg, FixedSliceConfig):
        return fixed_slice(sig, cfg)
    if peaks is None:
        raise NumericError(f"{type(cfg).__name__} needs anchor peaks")
    if isinstance(cfg, TimeSliceConfig):
        return time_slice(sig, peaks, cfg)
    return rr_frame(sig, peaks, cfg)


def _slice_one(
    job: SliceJob, signal_path: Path, peaks_path: Path | None, record_id: str
) -> FrameSet:
    with _stage("ingest", record_id=record_id):
        sig = read_signal_csv(signal_path, job.fs, record_id)
        log_with_id(
            logger, logging.DEBUG, "record_loaded",
            record_id=record_id, samples=len(sig), duration_s=sig.duration_s,
        )

    peaks: PeakList | None = None
    if job.method != "fixed":
        with _stage("peaks", record_id=record_id):
            if peaks_path is not None:
                if job.detect_peaks:
                    log_with_id(
                        logger,
                        logging.INFO,
                        "annotated peaks supplied; detection skipped",
                        record_id=record_id,
                    )
                peaks = read_peaks_csv(peaks_path, record_id)
            else:
                peaks = detect_peaks(sig, job.detect_config())

    with _stage("slice", record_id=record_id, method=job.method):
        return slice_record(sig, peaks, job.slicing_config())


def slice_records(job: SliceJob) -> FrameSet:
    """
    Slice every record of `job` and concatenate the frames in input order.

    Records are independent, so they run on a pool of `job.worker_count()`
    threads; each task runs in a copy of the caller's context so log lines
    keep the run id.
    """
    tasks = list(zip(job.signal, job.peak_paths(), job.record_ids()))
    workers = min(job.worker_count(), len(tasks))
    if workers <= 1:
        parts = [_slice_one(job, *task) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="compacta") as pool:
            futures = [
                pool.submit(contextvars.copy_context().run, _slice_one, job, *task)
                for task in tasks
            ]
            parts = [future.result() for future in futures]
    with _stage("slice", records=len(parts)):
        frames = FrameSet.concat(parts)
    log_with_id(
        logger,
        logging.INFO,
        "records_sliced",
        method=job.method,
        records=len(parts),
        frames=frames.frame_count,
        frame_length=frames.frame_length,
    )
    return frames


def run_slice(job: SliceJob) -> FrameSet:
    """`slice` sub-command: records -> FrameSet file."""
    frames = slice_records(job)
    with _stage("emit", out=str(job.out)):
        _commit([(job.out, lambda p: write_frameset_csv(frames, p))])
    return frames


def run_peaks(job: PeaksJob) -> PeakList:
    """`peaks` sub-command: detect anchors on one record and write them."""
    with _stage("ingest", record_id=job.record_id):
        sig = read_signal_csv(job.signal, job.fs, job.record_id)
    with _stage("peaks", record_id=sig.record_id):
        peaks = detect_peaks(sig, job.detect_config())
    with _stage("emit", out=str(job.out)):
        _commit([(job.out, lambda p: write_peaks_csv(peaks, p))])
    return peaks


# ---------------------------------------------------------------------------
# Standardization and metrics
# ---------------------------------------------------------------------------

def _standardize(
    frames: FrameSet, params: StandardizeParams
) -> tuple[FrameSet, list[StandardizationModel]]:
    with _stage("standardize", scope=params.standardize_scope):
        model = read_model(params.model_in) if params.model_in else None
        return standardize_frameset(
            frames,
            model=model,
            eta=params.eta,
            bin_width=params.resolved_bin_width,
            scale_convention=params.scale_convention,
            scope=params.standardize_scope,
        )


def _model_writes(
    params: StandardizeParams, models: Sequence[StandardizationModel]
) -> list[tuple[Path, Callable[[Path], None]]]:
    if params.model_out is None:
        return []
    if not models:
        log_with_id(
            logger,
            logging.WARNING,
            "no model fitted on an empty dataset; model_out not written",
            model_out=str(params.model_out),
        )
        return []
    pooled = models[0]
    return [(params.model_out, lambda p: write_model(pooled, p))]


def _score(frames: FrameSet, job: PipelineConfig | MetricsJob) -> QualityReport:
    with _stage("metrics", metrics_level=job.metrics_level):
        references: np.ndarray | None = None
        if job.references is not None:
            references = read_values_csv(job.references)
        return build_quality_report(
            frames,
            epsilon=job.epsilon,
            k_sigma=job.k_sigma,
            level=job.metrics_level,
            references=references,
            confusion=job.confusion_summary(),
        )


def _report_writes(
    report: QualityReport, job: PipelineConfig | MetricsJob
) -> list[tuple[Path, Callable[[Path], None]]]:
    writes: list[tuple[Path, Callable[[Path], None]]] = [
        (job.report, lambda p: write_report(report, p))
    ]
    if job.report_csv is not None:
        writes.append((job.report_csv, lambda p: write_report_csv(report, p)))
    return writes


def standardize_dataset(job: StandardizeJob) -> tuple[FrameSet, list[StandardizationModel]]:
    """`standardize` sub-command: FrameSet file -> standardized FrameSet file."""
    with _stage("ingest", data=str(job.data)):
        frames = read_frameset_csv(job.data)
    out, models = _standardize(frames, job)
    with _stage("emit", out=str(job.out)):
        _commit(
            [(job.out, lambda p: write_frameset_csv(out, p)), *_model_writes(job, models)]
        )
    return out, models


def score_dataset(job: MetricsJob) -> QualityReport:
    """`metrics` sub-command: FrameSet file -> quality report."""
    with _stage("ingest", data=str(job.data)):
        frames = read_frameset_csv(job.data)
    report = _score(frames, job)
    with _stage("emit", report=str(job.report)):
        _commit(_report_writes(report, job))
    return report


def describe_frameset(fs: FrameSet) -> dict[str, object]:
    """Shape and provenance summary printed by `inspect`."""
    methods: dict[str, int] = {}
    records: dict[str, int] = {}
    for prov in fs.provenance:
        methods[prov.method.value] = methods.get(prov.method.value, 0) + 1
        records[prov.record_id] = records.get(prov.record_id, 0) + 1
    return {
        "frame_count": fs.frame_count,
        "frame_length": fs.frame_length,
        "value_count": fs.value_count,
        "methods": methods,
        "records": records,
        "labelled": fs.labels is not None,
    }


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------

def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """
    ingest -> peaks -> slice -> standardize -> metrics -> emit.

    When standardization is enabled one model is fitted on all frame values
    pooled together (or read from `model_in`) and applied to every frame
    before emission; metrics are computed on the emitted frames.

    Raises:
        StageError: naming the failed stage; no output file is left behind.
    """
    with log_context(logger, "run_pipeline", method=cfg.method, records=len(cfg.signal)):
        frames = slice_records(cfg)

        models: list[StandardizationModel] = []
        if cfg.standardize:
            frames, models = _standardize(frames, cfg)

        report = _score(frames, cfg)

        with _stage("emit", out=str(cfg.out), report=str(cfg.report)):
            outputs = _commit(
                [
                    (cfg.out, lambda p: write_frameset_csv(frames, p)),
                    *_report_writes(report, cfg),
                    *_model_writes(cfg, models),
                ]
            )
    return PipelineResult(
        frameset=frames,
        report=report,
        models=tuple(models),
        outputs=outputs,
    )


__all__ = [
    "PipelineResult",
    "STAGES",
    "describe_frameset",
    "run_peaks",
    "run_pipeline",
    "run_slice",
    "score_dataset",
    "slice_record",
    "slice_records",
    "standardize_dataset",
    "validate_config",
    "validate_values",
]
