"""Parameter records for the density families, their domain and quadrature."""
import math
from dataclasses import asdict, dataclass, fields
from enum import Enum
from typing import Dict, Tuple, Type, Union

import numpy as np

from seroclass.utils.exceptions import InvalidConfigException, InvalidParameterException, UnknownFamilyException


class Family(Enum):
    NEGATIVE = "negative"
    POSITIVE = "positive"
    GRIDDED = "gridded"

    @classmethod
    def parse(cls, value: Union[str, "Family"]) -> "Family":
        if isinstance(value, Family):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise UnknownFamilyException(
                f"Unknown density family '{value}', expected one of {[f.value for f in cls]}"
            ) from None


class _ModelParams:
    """Shared helpers; subclasses are frozen dataclasses."""

    # fields that are optimized on a log scale
    POSITIVE_FIELDS: Tuple[str, ...] = ()
    # fields the optimizer leaves alone
    FIXED_FIELDS: Tuple[str, ...] = ()

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise InvalidParameterException(f"{type(self).__name__}.{f.name} must be finite, got {value}")
        for name in self.POSITIVE_FIELDS + self.FIXED_FIELDS:
            if getattr(self, name) <= 0:
                raise InvalidParameterException(
                    f"{type(self).__name__}.{name} must be positive, got {getattr(self, name)}"
                )

    @classmethod
    def free_fields(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls) if f.name not in cls.FIXED_FIELDS)

    def to_vector(self) -> np.ndarray:
        """Unconstrained optimizer coordinates: logs of positive fields, raw otherwise."""
        return np.array([
            math.log(getattr(self, name)) if name in self.POSITIVE_FIELDS else getattr(self, name)
            for name in self.free_fields()
        ])

    @classmethod
    def from_vector(cls, vector: np.ndarray, **fixed) -> "_ModelParams":
        values = {}
        for name, v in zip(cls.free_fields(), vector):
            values[name] = float(np.exp(v)) if name in cls.POSITIVE_FIELDS else float(v)
        values.update(fixed)
        return cls(**values)

    def fixed_values(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in self.FIXED_FIELDS}

    def asdict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class NegativeModelParams(_ModelParams):
    theta: float
    k: float
    alpha: float
    mu: float
    beta: float

    POSITIVE_FIELDS = ("theta", "k", "alpha", "beta")


@dataclass(frozen=True)
class PositiveModelParams(_ModelParams):
    alpha: float
    beta_shape: float
    theta: float
    mu: float
    z_scale: float = 9.0

    POSITIVE_FIELDS = ("alpha", "beta_shape", "theta")
    FIXED_FIELDS = ("z_scale",)


ModelParams = Union[NegativeModelParams, PositiveModelParams]

PARAMS_BY_FAMILY: Dict[Family, Type[_ModelParams]] = {
    Family.NEGATIVE: NegativeModelParams,
    Family.POSITIVE: PositiveModelParams,
}


def params_from_dict(family: Family, values: Dict[str, float]) -> ModelParams:
    family = Family.parse(family)
    if family not in PARAMS_BY_FAMILY:
        raise UnknownFamilyException(f"Family '{family.value}' has no parameter record")
    cls = PARAMS_BY_FAMILY[family]
    names = {f.name for f in fields(cls)}
    unknown = set(values) - names
    if unknown:
        raise InvalidParameterException(f"Unknown parameters for {family.value} family: {sorted(unknown)}")
    return cls(**{k: float(v) for k, v in values.items()})


@dataclass(frozen=True)
class DomainSpec:
    lo: float = 0.0
    hi: float = 7.0

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo >= self.hi:
            raise InvalidConfigException(f"Domain requires finite lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def area(self) -> float:
        return self.width ** 2

    def contains(self, x, y):
        """Elementwise membership of the closed square [lo, hi]^2."""
        x = np.asarray(x)
        y = np.asarray(y)
        return (x >= self.lo) & (x <= self.hi) & (y >= self.lo) & (y <= self.hi)

    def enlarged(self, margin: float) -> "DomainSpec":
        return DomainSpec(self.lo - margin, self.hi + margin)


class QuadratureScheme(Enum):
    TENSOR_TRAPEZOID = "tensor_trapezoid"
    TENSOR_GAUSS_LEGENDRE = "tensor_gauss_legendre"
    TENSOR_MIDPOINT = "tensor_midpoint"


MIN_NODES_PER_AXIS = 16


@dataclass(frozen=True)
class QuadratureSpec:
    nodes_per_axis: int = 512
    scheme: QuadratureScheme = QuadratureScheme.TENSOR_GAUSS_LEGENDRE

    def __post_init__(self):
        if not isinstance(self.scheme, QuadratureScheme):
            try:
                object.__setattr__(self, "scheme", QuadratureScheme(self.scheme))
            except ValueError as e:
                raise InvalidConfigException(f"Unknown quadrature scheme '{self.scheme}'") from e
        if int(self.nodes_per_axis) != self.nodes_per_axis or self.nodes_per_axis < MIN_NODES_PER_AXIS:
            raise InvalidConfigException(
                f"nodes_per_axis must be an integer >= {MIN_NODES_PER_AXIS}, got {self.nodes_per_axis}"
            )

    def coarsened(self) -> "QuadratureSpec":
        """The half-resolution rule used for convergence checks."""
        return QuadratureSpec(max(MIN_NODES_PER_AXIS, self.nodes_per_axis // 2), self.scheme)

    def asdict(self) -> Dict[str, object]:
        return {"nodes_per_axis": self.nodes_per_axis, "scheme": self.scheme.value}
