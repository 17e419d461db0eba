"""
Unit tests for the file formats in app.infrastructure.storage.files.

This module tests:
- signal, peaks and reference-value CSV ingestion and their error messages
- FrameSet CSV layout, empty files and read-back
- key=value parsing, reports and fitted model files
"""

import numpy as np
import pytest

from app.application.metrics.services import build_quality_report
from app.application.signals.entities import FrameSet, Method, PeakList, Provenance
from app.application.standardization.services import fit_standardization
from app.errors import ConfigError, DataIOError
from app.infrastructure.storage.files import (
    format_value,
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


class TestReadSignal:
    """Test cases for read_signal_csv."""

    def test_single_column(self, write_text):
        path = write_text("sig.csv", "0.1\n0.2\n0.3\n")
        sig = read_signal_csv(path, 100.0)
        assert sig.samples.tolist() == [0.1, 0.2, 0.3]
        assert sig.sampling_rate_hz == 100.0
        assert sig.record_id == "sig"

    def test_time_value_pairs_with_header(self, write_text):
        """Two columns plus a header: the value column is extracted, header excluded."""
        path = write_text("pairs.csv", "t,v\n0.00,1.5\n0.01,2.5\n0.02,3.5\n0.03,4.5\n")
        sig = read_signal_csv(path, 100.0, record_id="rec")
        assert sig.samples.tolist() == [1.5, 2.5, 3.5, 4.5]
        assert sig.record_id == "rec"

    def test_comments_skipped(self, write_text):
        path = write_text("c.csv", "# lead II\n1.0\n2.0\n")
        assert len(read_signal_csv(path, 1.0)) == 2

    def test_non_numeric_row_is_reported(self, write_text):
        """"abc" on the second row of a header-less file."""
        path = write_text("bad.csv", "0.1\nabc\n0.3\n")
        with pytest.raises(DataIOError, match="row 2"):
            read_signal_csv(path, 100.0)

    def test_non_finite_value_rejected(self, write_text):
        path = write_text("nan.csv", "value\n1.0\n2.0\ninf\n")
        with pytest.raises(DataIOError, match="row 4"):
            read_signal_csv(path, 100.0)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataIOError, match="not found"):
            read_signal_csv(tmp_path / "nope.csv", 100.0)

    def test_empty_file(self, write_text):
        with pytest.raises(DataIOError, match="empty"):
            read_signal_csv(write_text("empty.csv", ""), 100.0)

    @pytest.mark.parametrize("rate", [0.0, -5.0])
    def test_bad_sampling_rate(self, write_text, rate):
        with pytest.raises(ConfigError, match="sampling rate"):
            read_signal_csv(write_text("s.csv", "1\n2\n"), rate)

    def test_too_many_columns(self, write_text):
        with pytest.raises(DataIOError, match="columns"):
            read_signal_csv(write_text("wide.csv", "1,2,3\n4,5,6\n"), 10.0)


class TestPeaksFiles:
    """Test cases for read_peaks_csv and write_peaks_csv."""

    def test_plain_rows(self, write_text):
        peaks = read_peaks_csv(write_text("p.csv", "100\n200\n300\n"))
        assert peaks.indices.tolist() == [100, 200, 300]

    def test_header_is_optional(self, write_text):
        peaks = read_peaks_csv(write_text("p.csv", "index\n3\n9\n"), record_id="r7")
        assert peaks.indices.tolist() == [3, 9]
        assert peaks.source_record_id == "r7"

    def test_non_increasing(self, write_text):
        with pytest.raises(DataIOError, match="non-increasing at row 2"):
            read_peaks_csv(write_text("p.csv", "200\n100\n"))

    def test_non_integer(self, write_text):
        with pytest.raises(DataIOError, match="non-integer '1.5' at row 3"):
            read_peaks_csv(write_text("p.csv", "index\n1\n1.5\n"))

    def test_negative(self, write_text):
        with pytest.raises(DataIOError, match="negative index -4 at row 1"):
            read_peaks_csv(write_text("p.csv", "-4\n2\n"))

    def test_empty_file_is_empty_peak_list(self, write_text):
        assert len(read_peaks_csv(write_text("p.csv", ""))) == 0

    def test_written_file_reads_back(self, tmp_path, peak_list):
        path = tmp_path / "out_peaks.csv"
        write_peaks_csv(peak_list, path)
        assert path.read_text() == "index\n5\n15\n25\n"
        assert read_peaks_csv(path).indices.tolist() == [5, 15, 25]


class TestReadValues:
    """Test cases for read_values_csv."""

    def test_references_column(self, write_text):
        values = read_values_csv(write_text("refs.csv", "reference\n1.0\n-2.5\n"))
        assert values.tolist() == [1.0, -2.5]

    def test_pairs_not_allowed(self, write_text):
        with pytest.raises(DataIOError, match="columns"):
            read_values_csv(write_text("refs.csv", "1,2\n3,4\n"))


class TestFrameSetFiles:
    """Test cases for write_frameset_csv and read_frameset_csv."""

    def test_layout(self, tmp_path):
        """3 frames x 80 samples -> 4 lines, 84 fields per data row."""
        frames = np.arange(240, dtype=float).reshape(3, 80) / 7.0
        fs = FrameSet(
            frames=frames,
            frame_length=80,
            provenance=tuple(Provenance("rec", a, Method.TIME_SLICE) for a in (10, 20, 30)),
        )
        path = tmp_path / "frames.csv"
        write_frameset_csv(fs, path)
        lines = path.read_text().splitlines()
        assert len(lines) == 4
        assert lines[0].split(",")[:5] == ['"record_id"', '"anchor_index"', '"method"', '"label"', '"v0"']
        assert all(len(line.split(",")) == 84 for line in lines[1:])
        assert lines[1].startswith('"rec",10,"TIME_SLICE","",')

    def test_zero_frames_writes_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_frameset_csv(FrameSet.empty(3), path)
        assert path.read_text() == '"record_id","anchor_index","method","label","v0","v1","v2"\n'
        back = read_frameset_csv(path)
        assert back.frame_count == 0
        assert back.frame_length == 3

    def test_read_back_is_identical(self, tmp_path):
        rng = np.random.default_rng(3)
        fs = FrameSet(
            frames=rng.normal(size=(4, 5)) * 1e3,
            frame_length=5,
            provenance=tuple(Provenance("007", a, Method.RRIF) for a in range(4)),
            labels=("N", "V", "N", "A"),
        )
        path = tmp_path / "rt.csv"
        write_frameset_csv(fs, path)
        back = read_frameset_csv(path)
        np.testing.assert_array_equal(back.frames, fs.frames)
        assert back.provenance == fs.provenance
        assert back.labels == fs.labels

    @pytest.mark.parametrize(
        ("record_id", "label"),
        [("rec#1", "N"), ("r", "beat#3"), (" lead", " N"), ("#first", "#"), ('say "hi", ok', "a\nb")],
    )
    def test_text_cells_survive_read_back(self, tmp_path, record_id, label):
        fs = FrameSet(
            frames=np.array([[1.0, -0.0], [2.5, 3.0]]),
            frame_length=2,
            provenance=(Provenance(record_id, 0, Method.RRIF), Provenance(record_id, 7, Method.RRIF)),
            labels=(label, label),
        )
        path = tmp_path / "text.csv"
        write_frameset_csv(fs, path)
        back = read_frameset_csv(path)
        assert back.provenance == fs.provenance
        assert back.labels == fs.labels
        np.testing.assert_array_equal(back.frames, fs.frames)

    def test_only_leading_hash_lines_are_comments(self, write_text):
        path = write_text(
            "f.csv",
            "# exported frames\nrecord_id,anchor_index,method,label,v0\n#note\nrec#2,4,RRIF,N,1.5\n",
        )
        back = read_frameset_csv(path)
        assert back.provenance == (Provenance("rec#2", 4, Method.RRIF),)
        assert back.labels == ("N",)

    def test_unknown_method(self, write_text):
        path = write_text("f.csv", "record_id,anchor_index,method,label,v0\nr,0,SPLINE,,1.0\n")
        with pytest.raises(DataIOError, match="unknown method 'SPLINE' at row 2"):
            read_frameset_csv(path)

    def test_bad_value_cell(self, write_text):
        path = write_text(
            "f.csv", "record_id,anchor_index,method,label,v0,v1\nr,0,RRIF,,1.0,2.0\nr,3,RRIF,,x,2.0\n"
        )
        with pytest.raises(DataIOError, match="column v0 at row 3"):
            read_frameset_csv(path)

    def test_malformed_header(self, write_text):
        with pytest.raises(DataIOError, match="header"):
            read_frameset_csv(write_text("f.csv", "a,b,c\n1,2,3\n"))

    def test_partial_labels(self, write_text):
        path = write_text(
            "f.csv", "record_id,anchor_index,method,label,v0\nr,0,RRIF,N,1.0\nr,4,RRIF,,2.0\n"
        )
        with pytest.raises(DataIOError, match="labels"):
            read_frameset_csv(path)


class TestKeyValueFiles:
    """Test cases for key=value configs, reports and models."""

    def test_read_key_values_collects_all_problems(self, write_text):
        path = write_text("c.txt", "# run\nMethod = rrif\nbroken line\nmethod=fixed\n=3\n")
        values, errors = read_key_values(path)
        assert values == {"method": "rrif"}
        assert len(errors) == 3
        assert "line 3" in errors[0]
        assert "duplicate key 'method'" in errors[1]

    def test_unreadable_config(self, tmp_path):
        with pytest.raises(ConfigError):
            read_key_values(tmp_path / "missing.txt")

    def test_format_value(self):
        assert format_value(None) == "NA"
        assert format_value(0.1) == "0.1"
        assert format_value(Method.RRIF) == "RRIF"
        assert format_value(3) == "3"

    def test_report_file(self, tmp_path, small_frameset):
        report = build_quality_report(small_frameset, epsilon=1e-9, k_sigma=3.0)
        path = tmp_path / "report.txt"
        write_report(report, path)
        lines = path.read_text().splitlines()
        assert [line.split("=")[0] for line in lines] == [
            "method", "frame_count", "frame_length", "metrics_level", "maer", "apr", "op",
            "ucl", "epsilon", "k_sigma", "within_ucl", "total", "note",
        ]
        assert "maer=NA" in lines
        assert "apr=1.0" in lines
        assert "epsilon=1e-09" in lines

    def test_report_csv(self, tmp_path, small_frameset):
        report = build_quality_report(small_frameset)
        path = tmp_path / "report.csv"
        write_report_csv(report, path)
        header, row = path.read_text().splitlines()
        assert header.startswith("method,frame_count,frame_length,metrics_level,maer")
        assert row.startswith("TIME_SLICE,2,3,sample,NA,1.0,NA,")

    def test_model_round_trip(self, tmp_path):
        model = fit_standardization([2.0, 2.0, 2.0, 5.0, 0.3], bin_width=None)
        path = tmp_path / "model.txt"
        write_model(model, path)
        assert "bin_width=NA" in path.read_text().splitlines()
        assert read_model(path) == model

    def test_invalid_model_file(self, write_text):
        path = write_text("m.txt", "n=3\nmean=1.0\n")
        with pytest.raises(DataIOError, match="invalid"):
            read_model(path)
