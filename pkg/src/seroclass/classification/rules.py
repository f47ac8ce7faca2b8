"""
Prevalence-aware decision rules.

A binary rule labels a point positive when the prevalence-weighted positive
density exceeds the weighted negative density. A ternary rule only commits
when that comparison holds at both ends of a prevalence interval and holds
the point out otherwise. Comparisons use the product form throughout, so
points where a density vanishes need no special casing.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from seroclass.core.measurements import LogPoint, PointsLike, as_point_array
from seroclass.core.params import DomainSpec
from seroclass.core.preconditions import require_shared_domain
from seroclass.models.density import TruncatedDensity
from seroclass.utils.exceptions import InvalidConfigException, InvalidPrevalenceException, OutsideDomainException


class Label(Enum):
    POSITIVE = 1
    NEGATIVE = -1
    HOLDOUT = 0

    @property
    def text(self) -> str:
        return self.name.lower()

    @classmethod
    def from_code(cls, code: int) -> "Label":
        return cls(int(code))


class RuleKind(Enum):
    BINARY = "binary"
    TERNARY = "ternary"


def _check_prevalence(value: float, name: str) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise InvalidPrevalenceException(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class PrevalenceInterval:
    p_lo: float
    p_hi: float

    def __post_init__(self):
        _check_prevalence(self.p_lo, "p_lo")
        _check_prevalence(self.p_hi, "p_hi")
        if self.p_lo > self.p_hi:
            raise InvalidPrevalenceException(f"p_lo ({self.p_lo}) exceeds p_hi ({self.p_hi})")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.p_lo + self.p_hi)


@dataclass(frozen=True)
class Weights:
    """Relative cost of a false positive and of a false negative."""
    w_fp: float = 1.0
    w_fn: float = 1.0

    def __post_init__(self):
        if not (self.w_fp > 0 and self.w_fn > 0 and math.isfinite(self.w_fp) and math.isfinite(self.w_fn)):
            raise InvalidConfigException(f"Weights must be positive and finite, got ({self.w_fp}, {self.w_fn})")


@dataclass(frozen=True, eq=False)
class ClassificationRule:
    kind: RuleKind
    pos_density: TruncatedDensity
    neg_density: TruncatedDensity
    prevalence: Optional[float] = None
    interval: Optional[PrevalenceInterval] = None
    weights: Weights = Weights()

    def __post_init__(self):
        require_shared_domain(self.pos_density.domain, self.neg_density.domain)
        if self.kind is RuleKind.BINARY:
            if self.prevalence is None:
                raise InvalidPrevalenceException("A binary rule needs a prevalence")
            _check_prevalence(self.prevalence, "prevalence")
        elif self.interval is None:
            raise InvalidPrevalenceException("A ternary rule needs a prevalence interval")

    @classmethod
    def binary(
        cls, pos_density: TruncatedDensity, neg_density: TruncatedDensity, p: float, weights: Weights = Weights()
    ) -> "ClassificationRule":
        return cls(RuleKind.BINARY, pos_density, neg_density, prevalence=float(p), weights=weights)

    @classmethod
    def ternary(
        cls,
        pos_density: TruncatedDensity,
        neg_density: TruncatedDensity,
        interval: Union[PrevalenceInterval, Tuple[float, float]],
        weights: Weights = Weights(),
    ) -> "ClassificationRule":
        if not isinstance(interval, PrevalenceInterval):
            interval = PrevalenceInterval(*interval)
        return cls(RuleKind.TERNARY, pos_density, neg_density, interval=interval, weights=weights)

    @property
    def domain(self) -> DomainSpec:
        return self.pos_density.domain

    @property
    def decision_prevalence(self) -> float:
        """The prevalence scores and posteriors are reported at."""
        return self.prevalence if self.kind is RuleKind.BINARY else self.interval.midpoint

    def labels_from_values(self, pos_values: np.ndarray, neg_values: np.ndarray) -> np.ndarray:
        """Label codes (1 positive, -1 negative, 0 holdout) for density values."""
        pos_values = np.asarray(pos_values, dtype=float)
        neg_values = np.asarray(neg_values, dtype=float)
        w = self.weights
        if self.kind is RuleKind.BINARY:
            p = self.prevalence
            positive = w.w_fn * p * pos_values > w.w_fp * (1.0 - p) * neg_values
            return np.where(positive, 1, -1).astype(np.int8)

        cost_pos, cost_neg = ternary_costs(self, pos_values, neg_values)
        positive = cost_pos < 0.0
        negative = cost_neg < 0.0
        both = positive & negative
        labels = np.zeros(pos_values.shape, dtype=np.int8)
        labels[positive & ~both] = 1
        labels[negative & ~both] = -1
        labels[both] = np.where(cost_pos[both] < cost_neg[both], 1, -1)
        return labels

    def score_values(self, pos_values: np.ndarray, neg_values: np.ndarray) -> np.ndarray:
        p = self.decision_prevalence
        return self.weights.w_fn * p * np.asarray(pos_values) - self.weights.w_fp * (1.0 - p) * np.asarray(neg_values)

    def densities_at(self, points: PointsLike) -> Tuple[np.ndarray, np.ndarray]:
        arr = as_point_array(points)
        return self.pos_density(arr[:, 0], arr[:, 1]), self.neg_density(arr[:, 0], arr[:, 1])

    def label_codes(self, points: PointsLike) -> np.ndarray:
        return self.labels_from_values(*self.densities_at(points))

    def scores(self, points: PointsLike) -> np.ndarray:
        return self.score_values(*self.densities_at(points))


def ternary_costs(rule: ClassificationRule, pos_values: np.ndarray, neg_values: np.ndarray):
    """
    Pointwise contribution to the ternary loss of labeling a point positive or
    negative; holding it out contributes nothing.
    """
    p_lo, p_hi = rule.interval.p_lo, rule.interval.p_hi
    w = rule.weights
    cost_pos = w.w_fp * (1.0 - p_lo) * neg_values - p_lo * pos_values
    cost_neg = w.w_fn * p_hi * pos_values - (1.0 - p_hi) * neg_values
    return cost_pos, cost_neg


def _require_inside(rule: ClassificationRule, point: LogPoint) -> None:
    if not bool(rule.domain.contains(point.lx, point.ly)):
        raise OutsideDomainException(
            f"Point ({point.lx}, {point.ly}) lies outside [{rule.domain.lo}, {rule.domain.hi}]^2"
        )


def classify(rule: ClassificationRule, point: LogPoint) -> Label:
    _require_inside(rule, point)
    return Label.from_code(rule.label_codes([point])[0])


def classify_many(rule: ClassificationRule, points: Sequence[LogPoint]) -> list:
    arr = as_point_array(points)
    if len(arr) and not np.all(rule.domain.contains(arr[:, 0], arr[:, 1])):
        raise OutsideDomainException("Some points lie outside the rule's domain")
    return [Label.from_code(code) for code in rule.label_codes(arr)]


def likelihood_ratio(pos_density: TruncatedDensity, neg_density: TruncatedDensity, point: LogPoint) -> float:
    """P / N at ``point``: +inf where only N vanishes, NaN where both do."""
    pos, neg = pos_density.pdf(point), neg_density.pdf(point)
    if neg == 0.0:
        return math.inf if pos > 0.0 else math.nan
    return pos / neg


def posterior_probability(rule: ClassificationRule, point: LogPoint) -> float:
    """Probability that a sample at ``point`` is positive, at the rule's decision prevalence."""
    p = rule.decision_prevalence
    weighted_pos = p * rule.pos_density.pdf(point)
    total = weighted_pos + (1.0 - p) * rule.neg_density.pdf(point)
    return weighted_pos / total if total > 0.0 else math.nan
