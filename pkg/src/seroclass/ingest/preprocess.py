"""From raw measurements to points in the log-measurement plane."""
import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from seroclass.core.measurements import (
    LogPoint,
    PreprocessConfig,
    PreprocessedSample,
    RawSampleRecord,
    SampleLabel,
)
from seroclass.utils.exceptions import EmptyOutputException

_logger = logging.getLogger(__name__)

BELOW_FLOOR = "below rejection floor"
ONSET_TOO_RECENT = "symptom onset too recent"
NON_POSITIVE_REFERENCE = "non-positive reference"
NON_POSITIVE_AFTER_OFFSET = "non-positive after offset"


@dataclass(frozen=True)
class RejectionReport:
    rejected: Tuple[Tuple[str, str], ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.rejected)

    def reasons(self) -> List[str]:
        return [reason for _, reason in self.rejected]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self.rejected), columns=["sample_id", "reason"])

    def to_csv(self, path: str) -> None:
        self.to_frame().to_csv(path, index=False)


def _rejection_reason(record: RawSampleRecord, cfg: PreprocessConfig):
    if record.mfi_a < cfg.rejection_floor or record.mfi_b < cfg.rejection_floor:
        return BELOW_FLOOR
    if (
        cfg.min_onset_days is not None
        and record.label is SampleLabel.POSITIVE
        and record.days_since_onset is not None
        and record.days_since_onset < cfg.min_onset_days
    ):
        return ONSET_TOO_RECENT
    if cfg.normalize_reference and not record.reference > 0:
        return NON_POSITIVE_REFERENCE
    if record.mfi_a + cfg.offset <= 0 or record.mfi_b + cfg.offset <= 0:
        return NON_POSITIVE_AFTER_OFFSET
    return None


def preprocess(
    records: Sequence[RawSampleRecord], cfg: PreprocessConfig = PreprocessConfig()
) -> Tuple[List[PreprocessedSample], RejectionReport]:
    """
    Applies, in order: the rejection floor on raw values, the onset filter for
    positives, the offset, division by the reference signal, division by each
    channel's smallest value over the accepted records, and the natural log.
    """
    accepted: List[RawSampleRecord] = []
    rejected = []
    for record in records:
        reason = _rejection_reason(record, cfg)
        if reason is None:
            accepted.append(record)
        else:
            rejected.append((record.sample_id, reason))
    if not accepted:
        raise EmptyOutputException(f"All {len(records)} record(s) were rejected during preprocessing")
    if rejected:
        _logger.info("Rejected %d of %d record(s)", len(rejected), len(records))

    shifted = np.array([(r.mfi_a + cfg.offset, r.mfi_b + cfg.offset) for r in accepted], dtype=float)
    if cfg.normalize_reference:
        shifted = shifted / np.array([r.reference for r in accepted], dtype=float)[:, None]
    scaled = shifted / shifted.min(axis=0)
    coordinates = np.log(scaled) if cfg.log_transform else scaled

    samples = [
        PreprocessedSample(r.sample_id, r.label, LogPoint(float(x), float(y)))
        for r, (x, y) in zip(accepted, coordinates)
    ]
    return samples, RejectionReport(tuple(rejected))


def points_for_fitting(samples: Sequence[PreprocessedSample], label: SampleLabel) -> np.ndarray:
    """Coordinates of the samples carrying ``label``; unknown samples never qualify."""
    if label is SampleLabel.UNKNOWN:
        return np.empty((0, 2))
    rows = [(s.point.lx, s.point.ly) for s in samples if s.label is label]
    return np.array(rows, dtype=float).reshape(-1, 2)

