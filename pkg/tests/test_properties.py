"""
Property-based checks (hypothesis) of the numerical invariants.

This module tests:
- mode-based standardization reduces to the classic one once eta exceeds p-hat
- shift equivariance of phi and its two-valued dependence on eta
- the second-moment identity behind var_mode
- frame count laws of time_slice and rr_frame, anchoring and exact resampling
- MAER zero iff exact match, joint scale invariance, APR monotonicity, OP arithmetic
- FrameSet CSV write -> read returns identical values
"""

import math
import tempfile
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from app.application.metrics.services import apr, maer, overall_performance
from app.application.signals.entities import ConfusionSummary, FrameSet, Method, PeakList, Provenance, Signal
from app.application.slicing.dto import RRIFConfig, TimeSliceConfig
from app.application.slicing.services import rr_frame, time_slice
from app.application.standardization.entities import ScaleConvention
from app.application.standardization.services import (
    estimate_mode,
    fit_classic,
    fit_mode_variance,
    fit_standardization,
    revised_mode,
    standardize_classic,
    standardize_mode,
)
from app.infrastructure.storage.files import read_frameset_csv, write_frameset_csv

PROPERTY_SETTINGS = settings(
    max_examples=200,
    deadline=None,
    suppress_health_check=[HealthCheck.function_scoped_fixture],
)

# any text a cell can hold: quotes, commas, '#', spaces and line breaks included
cell_text = st.characters(blacklist_categories=("Cs",), blacklist_characters="\x00")
finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


@st.composite
def spread_data(draw):
    """Integer-valued samples with at least two distinct values."""
    values = draw(st.lists(st.integers(-1000, 1000), min_size=2, max_size=60))
    assume(len(set(values)) > 1)
    return np.asarray(values, dtype=float)


@st.composite
def mixed_data(draw):
    """Repeated small integers mixed with continuous values, shuffled; n in [2, 200]."""
    discrete = draw(st.lists(st.integers(-5, 5), max_size=100))
    continuous = draw(st.lists(finite, max_size=100))
    values = draw(st.permutations([float(v) for v in discrete] + continuous))
    assume(len(values) >= 2 and len(set(values)) > 1)
    return np.asarray(values, dtype=float)


@st.composite
def record_with_peaks(draw, min_gap: int = 1):
    """A signal plus strictly increasing in-range peaks with gaps >= min_gap."""
    gaps = draw(st.lists(st.integers(min_gap, 40), min_size=0, max_size=15))
    first = draw(st.integers(0, 20))
    peaks = first + np.cumsum([0, *gaps])
    tail = draw(st.integers(1, 50))
    n = int(peaks[-1]) + tail
    samples = draw(st.lists(finite, min_size=n, max_size=n))
    return Signal(samples=samples, sampling_rate_hz=100.0, record_id="h"), PeakList(indices=peaks)


class TestStandardizationProperties:
    """Invariants of the standardization transforms."""

    @PROPERTY_SETTINGS
    @given(data=spread_data(), convention=st.sampled_from(list(ScaleConvention)))
    def test_mode_reduces_to_classic_when_eta_exceeds_mode_probability(self, data, convention):
        """eta = 1 with at least two distinct values: p-hat < eta, phi = mean."""
        model = fit_standardization(data, eta=1.0, bin_width=None, scale_convention=convention)
        assert model.mode_prob < model.eta
        np.testing.assert_allclose(
            standardize_mode(data, model),
            standardize_classic(data, model),
            rtol=1e-12,
            atol=1e-12,
        )

    @PROPERTY_SETTINGS
    @given(data=st.lists(finite, min_size=1, max_size=60), phi=finite)
    def test_second_moment_identity(self, data, phi):
        arr = np.asarray(data)
        direct = float(np.mean((arr - phi) ** 2))
        assert fit_mode_variance(arr, phi) == pytest.approx(direct, rel=1e-9, abs=1e-6)

    @PROPERTY_SETTINGS
    @given(data=spread_data(), eta=st.floats(0.0, 1.0))
    def test_mode_variance_dominates_classic(self, data, eta):
        model = fit_standardization(data, eta=eta, bin_width="auto")
        assert model.var_mode >= model.var_classic * (1 - 1e-12)

    @PROPERTY_SETTINGS
    @given(
        data=mixed_data(),
        bin_width=st.sampled_from([None, "auto", 0.25]),
        convention=st.sampled_from(list(ScaleConvention)),
    )
    def test_classic_fallback_just_above_mode_probability(self, data, bin_width, convention):
        """eta one step above the measured p-hat always falls back to the mean."""
        p_hat = estimate_mode(data, bin_width).mode_prob
        assume(p_hat < 1.0)
        eta = math.nextafter(p_hat, 1.0)
        model = fit_standardization(data, eta=eta, bin_width=bin_width, scale_convention=convention)
        assert model.phi == model.mean
        np.testing.assert_allclose(
            standardize_mode(data, model),
            standardize_classic(data, model),
            rtol=1e-12,
            atol=1e-12,
        )

    @PROPERTY_SETTINGS
    @given(data=spread_data(), eta=st.floats(0.0, 1.0), shift=st.integers(-10_000, 10_000))
    def test_phi_follows_a_shift_of_the_data(self, data, eta, shift):
        base = revised_mode(data, eta=eta, bin_width=None)
        moved = revised_mode(data + shift, eta=eta, bin_width=None)
        assert moved == pytest.approx(base + shift, rel=1e-12, abs=1e-9)

    @PROPERTY_SETTINGS
    @given(
        data=mixed_data(),
        etas=st.lists(st.floats(0.0, 1.0), min_size=2, max_size=10),
        bin_width=st.sampled_from([None, "auto"]),
    )
    def test_raising_eta_only_moves_phi_to_the_mean(self, data, etas, bin_width):
        mode_value = estimate_mode(data, bin_width).mode_value
        mean, _ = fit_classic(data)
        phis = [revised_mode(data, eta=eta, bin_width=bin_width) for eta in sorted(etas)]
        assert set(phis) <= {mode_value, mean}
        at_mode = [phi == mode_value for phi in phis]
        assert at_mode == sorted(at_mode, reverse=True)


class TestSlicingProperties:
    """Count laws and anchoring of the slicing strategies."""

    @PROPERTY_SETTINGS
    @given(case=record_with_peaks(), width=st.integers(1, 60))
    def test_time_slice_count_law(self, case, width):
        sig, peaks = case
        assume(width <= len(sig))
        fs = time_slice(sig, peaks, TimeSliceConfig(window_s=width / sig.sampling_rate_hz))
        expected = [p for p in peaks.indices.tolist() if p + width <= len(sig)]
        assert fs.frame_count == len(expected)
        assert [p.anchor_index for p in fs.provenance] == expected
        for frame, anchor in zip(fs.frames, expected):
            assert frame[0] == sig.samples[anchor]

    @PROPERTY_SETTINGS
    @given(case=record_with_peaks(min_gap=2), length=st.integers(2, 50))
    def test_rr_frame_count_law_and_anchoring(self, case, length):
        sig, peaks = case
        fs = rr_frame(sig, peaks, RRIFConfig(frame_length=length))
        idx = peaks.indices.tolist()
        assert fs.frame_count == max(len(idx) - 1, 0)
        assert fs.frame_length == length
        for frame, start, stop in zip(fs.frames, idx, idx[1:]):
            assert frame[0] == sig.samples[start]
            assert frame[-1] == sig.samples[stop - 1]

    @PROPERTY_SETTINGS
    @given(
        length=st.integers(2, 40),
        offset=st.integers(0, 10),
        data=st.data(),
    )
    def test_segment_of_frame_length_is_reproduced(self, length, offset, data):
        n = offset + length + 1
        samples = np.asarray(data.draw(st.lists(finite, min_size=n, max_size=n)))
        sig = Signal(samples=samples, sampling_rate_hz=250.0)
        fs = rr_frame(sig, PeakList(indices=[offset, offset + length]), RRIFConfig(frame_length=length))
        np.testing.assert_array_equal(fs.frames[0], samples[offset : offset + length])


class TestMetricProperties:
    """Invariants of MAER, APR and OP."""

    positive = st.floats(min_value=1.0, max_value=1e3, allow_nan=False)

    @PROPERTY_SETTINGS
    @given(values=st.lists(st.floats(0.0, 1e6, allow_nan=False), min_size=1, max_size=50))
    def test_maer_of_exact_match_is_zero(self, values):
        assert maer(values, list(values)) == 0.0

    @PROPERTY_SETTINGS
    @given(
        pairs=st.lists(st.tuples(st.floats(0.0, 1e3), positive), min_size=1, max_size=40),
        epsilon=st.floats(1e-9, 1.0),
        scale=st.sampled_from([0.5, 3.0, 100.0]),
    )
    def test_maer_is_scale_invariant(self, pairs, epsilon, scale):
        y = np.array([p[0] for p in pairs])
        mu = np.array([p[1] for p in pairs])
        scaled = maer(scale * y, scale * mu, scale * epsilon)
        assert scaled == pytest.approx(maer(y, mu, epsilon), rel=1e-12, abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(
        references=st.lists(positive, min_size=1, max_size=40),
        data=st.data(),
    )
    def test_maer_of_any_mismatch_is_positive(self, references, data):
        mu = np.array(references)
        position = data.draw(st.integers(0, mu.size - 1))
        delta = data.draw(st.floats(1e-6, 10.0) | st.floats(-10.0, -1e-6))
        y = mu.copy()
        y[position] += delta
        assume(y[position] != mu[position])
        assert maer(y, mu) > 0.0

    @PROPERTY_SETTINGS
    @given(
        data=st.lists(finite, min_size=1, max_size=50),
        low=st.floats(0.0, 1e6),
        extra=st.floats(0.0, 1e6),
    )
    def test_apr_is_monotone_in_limit(self, data, low, extra):
        assert apr(data, low) <= apr(data, low + extra)

    @PROPERTY_SETTINGS
    @given(
        total=st.integers(1, 10_000),
        share=st.floats(0.0, 1.0),
        accuracy=st.floats(0.0, 1.0),
    )
    def test_overall_performance(self, total, share, accuracy):
        accepted = math.floor(share * total)
        cs = ConfusionSummary(accepted_count=accepted, total_count=total, accuracy=accuracy)
        assert overall_performance(cs) == pytest.approx(accepted / total * accuracy, rel=1e-12, abs=0)
        assert 0.0 <= overall_performance(cs) <= 1.0


class TestFrameSetFileProperties:
    """FrameSet CSV files preserve every value."""

    @PROPERTY_SETTINGS
    @given(
        rows=st.integers(1, 6),
        length=st.integers(1, 8),
        record_id=st.text(alphabet=cell_text, max_size=12),
        data=st.data(),
    )
    def test_write_then_read_is_identical(self, rows, length, record_id, data):
        values = data.draw(
            st.lists(
                st.floats(allow_nan=False, allow_infinity=False),
                min_size=rows * length,
                max_size=rows * length,
            )
        )
        labels = data.draw(
            st.none() | st.tuples(*[st.text(alphabet=cell_text, min_size=1, max_size=12)] * rows)
        )
        fs = FrameSet(
            frames=np.asarray(values).reshape(rows, length),
            frame_length=length,
            provenance=tuple(Provenance(record_id, 3 * k, Method.RRIF) for k in range(rows)),
            labels=labels,
        )
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "frames.csv"
            write_frameset_csv(fs, path)
            back = read_frameset_csv(path)
        np.testing.assert_array_equal(back.frames, fs.frames)
        assert back.provenance == fs.provenance
        assert back.labels == fs.labels
