"""Shared fixtures for the compacta test suite."""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterator
from pathlib import Path

import numpy as np
import pytest

from app.application.signals.entities import FrameSet, Method, PeakList, Provenance, Signal
from app.config import get_settings
from app.logging_utils import set_run_id

WriteText = Callable[[str, str], Path]


@pytest.fixture(autouse=True)
def _isolated_settings(monkeypatch: pytest.MonkeyPatch) -> Iterator[None]:
    """Fresh Settings per test; no COMPACTA_* environment variables leak in."""
    for name in (
        "COMPACTA_WORKERS",
        "COMPACTA_LOG_LEVEL",
        "COMPACTA_DEFAULT_ETA",
        "COMPACTA_DEFAULT_EPSILON",
        "COMPACTA_DEFAULT_K_SIGMA",
    ):
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    set_run_id("test")
    yield
    get_settings.cache_clear()
    set_run_id(None)


@pytest.fixture
def write_text(tmp_path: Path) -> WriteText:
    """Write `content` to tmp_path/name and return the path."""

    def _write(name: str, content: str) -> Path:
        path = tmp_path / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
        return path

    return _write


@pytest.fixture
def ramp_signal() -> Signal:
    """0, 1, ..., 19 at 10 Hz."""
    return Signal(samples=np.arange(20, dtype=float), sampling_rate_hz=10.0, record_id="ramp")


@pytest.fixture
def spiky_signal() -> Signal:
    """Flat zero line with unit spikes at 5, 15 and 25 (30 samples, 10 Hz)."""
    x = np.zeros(30)
    x[[5, 15, 25]] = 1.0
    return Signal(samples=x, sampling_rate_hz=10.0, record_id="spiky")


@pytest.fixture
def small_frameset() -> FrameSet:
    return FrameSet(
        frames=np.array([[1.0, 2.0, 3.0], [2.0, 2.0, 5.0]]),
        frame_length=3,
        provenance=(
            Provenance("r1", 4, Method.TIME_SLICE),
            Provenance("r1", 9, Method.TIME_SLICE),
        ),
    )


@pytest.fixture
def spiky_files(write_text: WriteText) -> tuple[Path, Path]:
    """Signal CSV (header `value`) and peaks CSV for `spiky_signal`."""
    x = np.zeros(30)
    x[[5, 15, 25]] = 1.0
    signal = write_text("spiky.csv", "value\n" + "".join(f"{v}\n" for v in x))
    peaks = write_text("spiky_peaks.csv", "index\n5\n15\n25\n")
    return signal, peaks


@pytest.fixture
def peak_list() -> PeakList:
    return PeakList(indices=np.array([5, 15, 25]), source_record_id="spiky")


@pytest.fixture
def caplog_info(caplog: pytest.LogCaptureFixture) -> pytest.LogCaptureFixture:
    caplog.set_level(logging.INFO)
    return caplog
