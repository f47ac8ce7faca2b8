"""Measurement records and the points they turn into after preprocessing."""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np

from seroclass.utils.exceptions import InvalidConfigException, InvalidParameterException


class SampleLabel(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, value: str) -> "SampleLabel":
        """Case-insensitive parse; surrounding whitespace is ignored."""
        normalized = str(value).strip().lower()
        for label in cls:
            if label.value == normalized:
                return label
        raise ValueError(f"Unknown sample label '{value}'")


@dataclass(frozen=True)
class RawSampleRecord:
    sample_id: str
    mfi_a: float
    mfi_b: float
    reference: float
    label: SampleLabel
    days_since_onset: Optional[int] = None


@dataclass(frozen=True)
class ColumnMapping:
    sample_id: str = "id"
    mfi_a: str = "rbd"
    mfi_b: str = "s1"
    reference: str = "ref"
    label: str = "label"
    days_since_onset: Optional[str] = None

    def required_columns(self) -> List[str]:
        return [self.sample_id, self.mfi_a, self.mfi_b, self.reference, self.label]


@dataclass(frozen=True)
class PreprocessConfig:
    offset: float = 300.0
    rejection_floor: float = -300.0
    min_onset_days: Optional[int] = 7
    log_transform: bool = True
    normalize_reference: bool = True

    def __post_init__(self):
        if self.offset < 0:
            raise InvalidConfigException(f"offset must be non-negative, got {self.offset}")
        if self.rejection_floor > 0:
            raise InvalidConfigException(f"rejection_floor must be <= 0, got {self.rejection_floor}")
        if self.offset + self.rejection_floor < 0:
            raise InvalidConfigException(
                f"offset ({self.offset}) does not lift the rejection floor ({self.rejection_floor}) "
                f"to a non-negative value"
            )


@dataclass(frozen=True)
class LogPoint:
    lx: float
    ly: float

    def __post_init__(self):
        if not (math.isfinite(self.lx) and math.isfinite(self.ly)):
            raise InvalidParameterException(f"LogPoint coordinates must be finite, got ({self.lx}, {self.ly})")

    @property
    def z(self) -> float:
        return (self.lx + self.ly) / math.sqrt(2.0)

    @property
    def w(self) -> float:
        return (self.lx - self.ly) / math.sqrt(2.0)


@dataclass(frozen=True)
class PreprocessedSample:
    sample_id: str
    label: SampleLabel
    point: LogPoint


PointsLike = Union[np.ndarray, Sequence[LogPoint]]


def as_point_array(points: PointsLike) -> np.ndarray:
    """
    Returns an (n, 2) float array for either a sequence of LogPoint or an array
    of coordinates. An empty input gives a (0, 2) array.
    """
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=float)
        if arr.size == 0:
            return np.empty((0, 2))
        return arr.reshape(-1, 2)
    points = list(points)
    if not points:
        return np.empty((0, 2))
    return np.array([(p.lx, p.ly) for p in points], dtype=float)


def as_log_points(coordinates: Iterable) -> List[LogPoint]:
    return [LogPoint(float(x), float(y)) for x, y in coordinates]
