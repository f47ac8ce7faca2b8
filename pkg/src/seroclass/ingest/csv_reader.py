"""Reading assay exports and log-space point files."""
import logging
import os
from typing import List, Optional

import numpy as np
import pandas as pd

from seroclass.core.measurements import ColumnMapping, LogPoint, PreprocessedSample, RawSampleRecord, SampleLabel
from seroclass.utils.exceptions import MissingColumnException, MissingInputException, RowParseException

_logger = logging.getLogger(__name__)

# the header is line 1
_FIRST_DATA_LINE = 2


def _read_frame(path: str, required: List[str]) -> pd.DataFrame:
    if not os.path.exists(path):
        raise MissingInputException(f"Input file '{path}' does not exist")
    try:
        frame = pd.read_csv(path, sep=",", dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise MissingColumnException(f"Input file '{path}' has no header") from None
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise MissingColumnException(f"Input file '{path}' lacks column(s) {missing}; header is {list(frame.columns)}")
    return frame


def _numeric(frame: pd.DataFrame, column: str, path: str) -> np.ndarray:
    values = pd.to_numeric(frame[column].str.strip(), errors="coerce")
    bad = np.flatnonzero(values.isna().to_numpy())
    if len(bad):
        lines = [int(i) + _FIRST_DATA_LINE for i in bad]
        raise RowParseException(
            f"Non-numeric value(s) in column '{column}' of '{path}' on line(s) {lines[:10]}", lines[0]
        )
    return values.to_numpy(dtype=float)


def _labels(frame: pd.DataFrame, column: str, path: str) -> List[SampleLabel]:
    labels = []
    for i, raw in enumerate(frame[column]):
        try:
            labels.append(SampleLabel.parse(raw))
        except ValueError:
            raise RowParseException(
                f"Unknown label '{raw}' in '{path}' on line {i + _FIRST_DATA_LINE}", i + _FIRST_DATA_LINE
            ) from None
    return labels


def _onset_days(frame: pd.DataFrame, column: Optional[str], path: str) -> List[Optional[int]]:
    if column is None:
        return [None] * len(frame)
    days = []
    for i, raw in enumerate(frame[column].str.strip()):
        if raw == "":
            days.append(None)
            continue
        try:
            value = int(raw)
        except ValueError:
            value = -1
        if value < 0:
            raise RowParseException(
                f"days since onset must be a non-negative integer, got '{raw}' in '{path}' "
                f"on line {i + _FIRST_DATA_LINE}",
                i + _FIRST_DATA_LINE,
            )
        days.append(value)
    return days


def parse_csv(path: str, schema: ColumnMapping = ColumnMapping()) -> List[RawSampleRecord]:
    """
    Reads raw measurements, one record per data row. Labels are matched case
    insensitively. Unparseable numbers raise a RowParseException naming the
    offending line(s).
    """
    required = schema.required_columns() + ([schema.days_since_onset] if schema.days_since_onset else [])
    frame = _read_frame(path, required)
    mfi_a = _numeric(frame, schema.mfi_a, path)
    mfi_b = _numeric(frame, schema.mfi_b, path)
    reference = _numeric(frame, schema.reference, path)
    labels = _labels(frame, schema.label, path)
    days = _onset_days(frame, schema.days_since_onset, path)
    records = [
        RawSampleRecord(str(sid), float(a), float(b), float(r), label, d)
        for sid, a, b, r, label, d in zip(frame[schema.sample_id], mfi_a, mfi_b, reference, labels, days)
    ]
    _logger.info("Read %d record(s) from %s", len(records), path)
    return records


def parse_log_csv(path: str, id_column: str = "sample_id", label_column: str = "label") -> List[PreprocessedSample]:
    """Reads points already in log space, columns ``sample_id,lx,ly,label``."""
    frame = _read_frame(path, [id_column, "lx", "ly", label_column])
    lx = _numeric(frame, "lx", path)
    ly = _numeric(frame, "ly", path)
    labels = _labels(frame, label_column, path)
    samples = [
        PreprocessedSample(str(sid), label, LogPoint(float(x), float(y)))
        for sid, x, y, label in zip(frame[id_column], lx, ly, labels)
    ]
    _logger.info("Read %d log-space point(s) from %s", len(samples), path)
    return samples
