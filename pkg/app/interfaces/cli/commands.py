"""
Command-line interface for compacta.

Sub-commands:
    run          full pipeline from a key=value config (+ --set overrides)
    slice        records -> FrameSet CSV
    peaks        record -> detected anchor peaks CSV
    standardize  FrameSet CSV -> mode-standardized FrameSet CSV
    metrics      FrameSet CSV -> quality report
    inspect      print a FrameSet summary to standard output

Flags are turned into the same flat key=value mapping a config file holds and
validated by the same models, so flag and file input follow one rule set.

Exception policy lives here only: every expected failure maps to its exit
code (2 config, 3 I/O, 4 numeric) and is logged once; anything else is logged
with a traceback and a short error id, and exits 1.
"""

from __future__ import annotations

import argparse
import logging
import uuid
from collections.abc import Callable, Sequence
from typing import Any

from app.application.pipeline.dto import MetricsJob, PeaksJob, SliceJob, StandardizeJob
from app.application.pipeline.services import (
    describe_frameset,
    run_peaks,
    run_pipeline,
    run_slice,
    score_dataset,
    standardize_dataset,
    validate_config,
    validate_values,
)
from app.errors import CompactaError, ConfigError
from app.infrastructure.storage.files import format_value, read_frameset_csv
from app.logging_utils import get_logger, log_with_id

logger = get_logger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

# argparse bookkeeping that is not part of any config
_META_KEYS = frozenset({"command", "handler", "log_level"})


# ---------------------------------------------------------------------------
# Handlers
# ---------------------------------------------------------------------------

def _flags(args: argparse.Namespace) -> dict[str, Any]:
    """Flags the user actually gave, keyed by config key."""
    return {k: v for k, v in vars(args).items() if k not in _META_KEYS and v is not None}


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = validate_config(args.config, args.overrides or ())
    result = run_pipeline(cfg)
    log_with_id(
        logger,
        logging.INFO,
        "run complete",
        frames=result.frameset.frame_count,
        outputs=",".join(str(p) for p in result.outputs),
    )
    return 0


def _cmd_slice(args: argparse.Namespace) -> int:
    job = validate_values(_flags(args), SliceJob)
    frames = run_slice(job)
    log_with_id(logger, logging.INFO, "slice complete", frames=frames.frame_count, out=str(job.out))
    return 0


def _cmd_peaks(args: argparse.Namespace) -> int:
    job = validate_values(_flags(args), PeaksJob)
    peaks = run_peaks(job)
    log_with_id(logger, logging.INFO, "peaks complete", peaks=len(peaks), out=str(job.out))
    return 0


def _cmd_standardize(args: argparse.Namespace) -> int:
    job = validate_values(_flags(args), StandardizeJob)
    frames, models = standardize_dataset(job)
    log_with_id(
        logger,
        logging.INFO,
        "standardize complete",
        frames=frames.frame_count,
        models=len(models),
        out=str(job.out),
    )
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    job = validate_values(_flags(args), MetricsJob)
    report = score_dataset(job)
    log_with_id(logger, logging.INFO, "metrics complete", apr=report.apr, report=str(job.report))
    return 0


def _cmd_inspect(args: argparse.Namespace) -> int:
    summary = describe_frameset(read_frameset_csv(args.data))
    for key, value in summary.items():
        if isinstance(value, dict):
            value = ",".join(f"{k}:{n}" for k, n in value.items()) or None
        print(f"{key}={format_value(value)}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_slicing_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=("time_slice", "rrif", "fixed"))
    p.add_argument("--fs", help="Sampling rate in Hz.")
    p.add_argument("--signal", nargs="+", help="One or more signal CSV files.")
    p.add_argument("--peaks", nargs="+", help="Peaks CSV per signal (time_slice/rrif).")
    p.add_argument("--record-id", nargs="+", help="Record id per signal (default: file stem).")
    p.add_argument("--out", help="Output FrameSet CSV.")
    p.add_argument("--window-s", help="time_slice window length in seconds.")
    p.add_argument("--frame-length", help="rrif points per frame.")
    p.add_argument("--start-s", help="fixed range start in seconds (default 0).")
    p.add_argument("--duration-s", help="fixed range length in seconds.")
    p.add_argument(
        "--detect-peaks",
        action="store_true",
        default=None,
        help="Detect anchor peaks instead of reading a peaks file.",
    )
    p.add_argument("--min-height", help="Detection height threshold.")
    p.add_argument("--refractory-s", help="Detection refractory period in seconds.")
    p.add_argument("--workers", help="Threads used for multi-record runs.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compacta",
        description="Reduce long physiological/sensor records to compact, standardized frames.",
    )
    parser.add_argument("--log-level", choices=LOG_LEVELS, help="Override COMPACTA_LOG_LEVEL.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="Run the full pipeline from a config file.")
    p.add_argument("--config", required=True, help="key=value config file.")
    p.add_argument(
        "--set",
        dest="overrides",
        action="append",
        metavar="KEY=VALUE",
        help="Override one config key (repeatable; flags win over the file).",
    )
    p.set_defaults(handler=_cmd_run)

    p = sub.add_parser("slice", help="Slice records into a FrameSet CSV.")
    _add_slicing_flags(p)
    p.set_defaults(handler=_cmd_slice)

    p = sub.add_parser("peaks", help="Detect anchor peaks and write a peaks CSV.")
    p.add_argument("--signal", required=True)
    p.add_argument("--fs", required=True, help="Sampling rate in Hz.")
    p.add_argument("--record-id")
    p.add_argument("--min-height")
    p.add_argument("--refractory-s")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_peaks)

    p = sub.add_parser("standardize", help="Mode-standardize a FrameSet CSV.")
    p.add_argument("--data", required=True, help="Input FrameSet CSV.")
    p.add_argument("--out", required=True, help="Output FrameSet CSV.")
    p.add_argument("--eta", help="Mode probability threshold in [0,1] (default 0.5).")
    p.add_argument("--bin-width", help="Positive width, 'auto' (default) or 'exact'.")
    p.add_argument("--scale", dest="scale_convention", choices=("se", "sd"))
    p.add_argument("--scope", dest="standardize_scope", choices=("pooled", "frame"))
    p.add_argument("--model-in", help="Apply a previously fitted model.")
    p.add_argument("--model-out", help="Write the fitted pooled model.")
    p.set_defaults(handler=_cmd_standardize)

    p = sub.add_parser("metrics", help="Score a FrameSet CSV.")
    p.add_argument("--data", required=True, help="Input FrameSet CSV.")
    p.add_argument("--report", required=True, help="key=value report output.")
    p.add_argument("--report-csv", help="One-row CSV report output.")
    p.add_argument("--epsilon")
    p.add_argument("--k-sigma")
    p.add_argument("--level", dest="metrics_level", choices=("sample", "frame"))
    p.add_argument("--references", help="Reference values CSV for MAER.")
    p.add_argument("--accepted", dest="accepted_count")
    p.add_argument("--total", dest="total_count")
    p.add_argument("--accuracy")
    p.set_defaults(handler=_cmd_metrics)

    p = sub.add_parser("inspect", help="Print a FrameSet summary.")
    p.add_argument("--data", required=True, help="FrameSet CSV.")
    p.set_defaults(handler=_cmd_inspect)

    return parser


# ---------------------------------------------------------------------------
# Execution and exit codes
# ---------------------------------------------------------------------------

def execute(args: argparse.Namespace) -> int:
    """Run the selected handler and map failures to exit codes."""
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except ConfigError as exc:
        log_with_id(logger, logging.ERROR, "configuration rejected", command=args.command)
        for violation in exc.violations:
            log_with_id(logger, logging.ERROR, f"  - {violation}")
        return exc.exit_code
    except CompactaError as exc:
        log_with_id(logger, logging.ERROR, str(exc), command=args.command)
        return exc.exit_code
    except Exception:
        error_id = str(uuid.uuid4())[:8]
        logger.exception("Unhandled error error_id=%s command=%s", error_id, args.command)
        return 1


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


__all__ = ["build_parser", "execute", "parse_args"]
