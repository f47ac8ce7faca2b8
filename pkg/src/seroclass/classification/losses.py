"""Loss functionals and region masses, integrated on the shared quadrature grid."""
import logging
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np

from seroclass.classification.rules import ClassificationRule, RuleKind
from seroclass.core.params import QuadratureSpec
from seroclass.models.quadrature import QuadratureGrid, build_grid
from seroclass.utils.exceptions import InvalidConfigException

_logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridEvaluation:
    """Densities, quadrature weights and label codes of a rule on one grid."""
    grid: QuadratureGrid
    pos_values: np.ndarray
    neg_values: np.ndarray
    labels: np.ndarray


def evaluate_on_grid(
    rule: ClassificationRule, quad: QuadratureSpec, labels: Optional[np.ndarray] = None
) -> GridEvaluation:
    grid = build_grid(rule.domain, quad)
    pos_values = rule.pos_density.values_on(grid)
    neg_values = rule.neg_density.values_on(grid)
    if labels is None:
        labels = rule.labels_from_values(pos_values, neg_values)
    elif np.shape(labels) != grid.shape:
        raise InvalidConfigException(f"Label override has shape {np.shape(labels)}, expected {grid.shape}")
    return GridEvaluation(grid, pos_values, neg_values, np.asarray(labels))


@dataclass(frozen=True)
class DomainMasses:
    """Mass of each density in the positive, negative and holdout regions."""
    P_P: float
    N_P: float
    P_N: float
    N_N: float
    P_H: float
    N_H: float

    @property
    def positive_total(self) -> float:
        return self.P_P + self.P_N + self.P_H

    @property
    def negative_total(self) -> float:
        return self.N_P + self.N_N + self.N_H

    def as_tuple(self) -> Tuple[float, ...]:
        return self.P_P, self.N_P, self.P_N, self.N_N, self.P_H, self.N_H


def _masses(evaluation: GridEvaluation) -> DomainMasses:
    weights = evaluation.grid.weights
    weighted_pos = weights * evaluation.pos_values
    weighted_neg = weights * evaluation.neg_values
    masses = {}
    for suffix, code in (("P", 1), ("N", -1), ("H", 0)):
        region = evaluation.labels == code
        masses["P_" + suffix] = float(np.sum(weighted_pos[region]))
        masses["N_" + suffix] = float(np.sum(weighted_neg[region]))
    return DomainMasses(**masses)


def domain_masses(
    rule: ClassificationRule, quad: QuadratureSpec = QuadratureSpec(), labels: Optional[np.ndarray] = None
) -> DomainMasses:
    return _masses(evaluate_on_grid(rule, quad, labels))


@dataclass(frozen=True)
class LossReport:
    false_pos_mass: float
    false_neg_mass: float
    total: float
    holdout_mass_pos: float
    holdout_mass_neg: float
    converged: bool = True

    def asdict(self):
        return asdict(self)


def _quadrature_converged(rule: ClassificationRule) -> bool:
    converged = rule.pos_density.converged and rule.neg_density.converged
    if not converged:
        _logger.warning("Loss evaluated with densities whose normalization has not converged")
    return converged


def loss_binary(
    rule: ClassificationRule,
    quad: QuadratureSpec = QuadratureSpec(),
    labels: Optional[np.ndarray] = None,
    prevalence: Optional[float] = None,
) -> LossReport:
    """
    Weighted false-positive plus false-negative mass of the rule's partition.

    ``prevalence`` weights the two error masses and defaults to the rule's own;
    passing the true prevalence evaluates a rule built for an assumed one.
    ``labels`` overrides the rule's partition on the quadrature grid.
    """
    if prevalence is None:
        if rule.kind is not RuleKind.BINARY:
            raise InvalidConfigException("loss_binary of a ternary rule needs an explicit prevalence")
        prevalence = rule.prevalence
    masses = domain_masses(rule, quad, labels)
    w = rule.weights
    total = w.w_fp * (1.0 - prevalence) * masses.N_P + w.w_fn * prevalence * masses.P_N
    return LossReport(masses.N_P, masses.P_N, total, masses.P_H, masses.N_H, _quadrature_converged(rule))


def loss_ternary(
    rule: ClassificationRule, quad: QuadratureSpec = QuadratureSpec(), labels: Optional[np.ndarray] = None
) -> float:
    """
    Worst-case false-classification mass over the prevalence interval minus
    best-case correct-classification mass; lies in [-1, 1] for unit weights.
    """
    if rule.kind is not RuleKind.TERNARY:
        raise InvalidConfigException("loss_ternary needs a ternary rule")
    masses = domain_masses(rule, quad, labels)
    _quadrature_converged(rule)
    p_lo, p_hi = rule.interval.p_lo, rule.interval.p_hi
    w = rule.weights
    return (
        w.w_fp * (1.0 - p_lo) * masses.N_P
        + w.w_fn * p_hi * masses.P_N
        - p_lo * masses.P_P
        - (1.0 - p_hi) * masses.N_N
    )


def loss_for_labels(
    rule: ClassificationRule, labels: np.ndarray, quad: QuadratureSpec = QuadratureSpec()
) -> float:
    """The rule's own loss functional evaluated for an arbitrary labeling of the grid."""
    if rule.kind is RuleKind.BINARY:
        return loss_binary(rule, quad, labels).total
    return loss_ternary(rule, quad, labels)


@dataclass(frozen=True)
class DiagnosticSummary:
    sensitivity: float
    specificity: float
    positive_predictive_value: float
    negative_predictive_value: float
    holdout_fraction: float
    prevalence: float

    def asdict(self):
        return asdict(self)


def _ratio(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator > 0 else float("nan")


def diagnostic_summary(
    rule: ClassificationRule, quad: QuadratureSpec = QuadratureSpec(), prevalence: Optional[float] = None
) -> DiagnosticSummary:
    """Sensitivity, specificity and predictive values implied by the rule's regions."""
    p = rule.decision_prevalence if prevalence is None else prevalence
    m = domain_masses(rule, quad)
    return DiagnosticSummary(
        sensitivity=m.P_P,
        specificity=m.N_N,
        positive_predictive_value=_ratio(p * m.P_P, p * m.P_P + (1.0 - p) * m.N_P),
        negative_predictive_value=_ratio((1.0 - p) * m.N_N, (1.0 - p) * m.N_N + p * m.P_N),
        holdout_fraction=p * m.P_H + (1.0 - p) * m.N_H,
        prevalence=p,
    )
