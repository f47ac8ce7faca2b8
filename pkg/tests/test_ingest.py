import math

import numpy as np
import pandas as pd
import pytest

from seroclass.core.measurements import ColumnMapping, PreprocessConfig, RawSampleRecord, SampleLabel
from seroclass.ingest.csv_reader import parse_csv, parse_log_csv
from seroclass.ingest.preprocess import (
    BELOW_FLOOR,
    NON_POSITIVE_REFERENCE,
    ONSET_TOO_RECENT,
    points_for_fitting,
    preprocess,
)
from seroclass.utils.exceptions import (
    EmptyOutputException,
    InvalidConfigException,
    MissingColumnException,
    MissingInputException,
    RowParseException,
)

WITH_DAYS = ColumnMapping(days_since_onset="days")


class TestParseCsv:
    def test_reads_every_row(self, raw_csv):
        records = parse_csv(raw_csv)
        assert [r.sample_id for r in records] == ["n1", "n2", "n3", "n4", "p1", "p2", "p3", "u1"]
        assert records[0].mfi_a == 120.0 and records[0].mfi_b == 80.0
        assert all(r.days_since_onset is None for r in records)

    def test_labels_are_case_insensitive(self, raw_csv):
        labels = [r.label for r in parse_csv(raw_csv)]
        assert labels[2] is SampleLabel.NEGATIVE
        assert labels[5] is SampleLabel.POSITIVE
        assert labels[7] is SampleLabel.UNKNOWN

    def test_optional_days_column(self, raw_csv):
        records = parse_csv(raw_csv, WITH_DAYS)
        assert records[4].days_since_onset == 14
        assert records[5].days_since_onset == 3
        assert records[0].days_since_onset is None

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingInputException):
            parse_csv(str(tmp_path / "absent.csv"))

    def test_missing_column(self, tmp_path, raw_frame):
        path = tmp_path / "no_ref.csv"
        raw_frame.drop(columns=["ref"]).to_csv(path, index=False)
        with pytest.raises(MissingColumnException, match="ref"):
            parse_csv(str(path))

    def test_bad_number_reports_its_line(self, tmp_path, raw_frame):
        frame = raw_frame.astype({"s1": object})
        frame.loc[3, "s1"] = "n/a"
        path = tmp_path / "bad.csv"
        frame.to_csv(path, index=False)
        with pytest.raises(RowParseException) as e:
            parse_csv(str(path))
        # header is line 1, row index 3 is line 5
        assert e.value.line_number == 5

    def test_unknown_label(self, tmp_path, raw_frame):
        frame = raw_frame.copy()
        frame.loc[0, "label"] = "maybe"
        path = tmp_path / "label.csv"
        frame.to_csv(path, index=False)
        with pytest.raises(RowParseException) as e:
            parse_csv(str(path))
        assert e.value.line_number == 2

    def test_custom_column_names(self, tmp_path, raw_frame):
        path = tmp_path / "renamed.csv"
        raw_frame.rename(columns={"rbd": "RBD_MFI", "s1": "S1_MFI"}).to_csv(path, index=False)
        records = parse_csv(str(path), ColumnMapping(mfi_a="RBD_MFI", mfi_b="S1_MFI"))
        assert len(records) == 8


class TestPreprocess:
    def test_rejections_and_reasons(self, raw_csv):
        samples, report = preprocess(parse_csv(raw_csv, WITH_DAYS))
        assert dict(report.rejected) == {
            "n2": BELOW_FLOOR,
            "n4": NON_POSITIVE_REFERENCE,
            "p2": ONSET_TOO_RECENT,
        }
        assert [s.sample_id for s in samples] == ["n1", "n3", "p1", "p3", "u1"]

    def test_onset_filter_needs_the_days_column(self, raw_csv):
        samples, report = preprocess(parse_csv(raw_csv))
        assert "p2" in [s.sample_id for s in samples]
        assert ONSET_TOO_RECENT not in report.reasons()

    def test_channel_minimum_maps_to_origin(self, raw_csv):
        samples, _ = preprocess(parse_csv(raw_csv, WITH_DAYS))
        points = np.array([(s.point.lx, s.point.ly) for s in samples])
        assert points.min(axis=0) == pytest.approx([0.0, 0.0], abs=1e-12)
        by_id = {s.sample_id: s.point for s in samples}
        # n3 has the smallest normalized signal in both channels
        assert by_id["n3"].lx == pytest.approx(0.0, abs=1e-12)
        expected = math.log((6100.0 + 300.0) / ((60.0 + 300.0) / 1.1))
        assert by_id["p3"].lx == pytest.approx(expected)

    def test_worked_example(self):
        records = [
            RawSampleRecord("a", 0.0, 0.0, 1000.0, SampleLabel.NEGATIVE),
            RawSampleRecord("b", 2700.0, 0.0, 1000.0, SampleLabel.POSITIVE),
        ]
        samples, report = preprocess(records, PreprocessConfig(min_onset_days=None))
        assert len(report) == 0
        assert [s.point.lx for s in samples] == pytest.approx([0.0, math.log(10.0)], abs=1e-12)
        assert [s.point.ly for s in samples] == pytest.approx([0.0, 0.0], abs=1e-12)

    def test_without_reference_normalization(self, raw_csv):
        cfg = PreprocessConfig(normalize_reference=False)
        samples, report = preprocess(parse_csv(raw_csv), cfg)
        assert NON_POSITIVE_REFERENCE not in report.reasons()
        assert "n4" in [s.sample_id for s in samples]

    def test_everything_rejected(self, raw_csv):
        records = [r for r in parse_csv(raw_csv) if r.sample_id == "n2"]
        with pytest.raises(EmptyOutputException):
            preprocess(records)

    def test_rejection_report_csv(self, raw_csv, tmp_path):
        _, report = preprocess(parse_csv(raw_csv, WITH_DAYS))
        path = tmp_path / "rejected.csv"
        report.to_csv(str(path))
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["sample_id", "reason"]
        assert len(frame) == len(report) == 3

    def test_points_for_fitting(self, raw_csv):
        samples, _ = preprocess(parse_csv(raw_csv, WITH_DAYS))
        assert points_for_fitting(samples, SampleLabel.POSITIVE).shape == (2, 2)
        assert points_for_fitting(samples, SampleLabel.NEGATIVE).shape == (2, 2)
        assert points_for_fitting(samples, SampleLabel.UNKNOWN).shape == (0, 2)

    def test_invalid_config(self):
        with pytest.raises(InvalidConfigException):
            PreprocessConfig(offset=100.0, rejection_floor=-300.0)
        with pytest.raises(InvalidConfigException):
            PreprocessConfig(rejection_floor=10.0)


class TestParseLogCsv:
    def test_reads_points(self, log_csv):
        samples = parse_log_csv(log_csv)
        assert len(samples) == 400
        assert sum(s.label is SampleLabel.POSITIVE for s in samples) == 80

    def test_requires_coordinates(self, tmp_path):
        path = tmp_path / "partial.csv"
        pd.DataFrame({"sample_id": ["a"], "lx": [0.1], "label": ["negative"]}).to_csv(path, index=False)
        with pytest.raises(MissingColumnException):
            parse_log_csv(str(path))
