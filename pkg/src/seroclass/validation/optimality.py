import logging
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np

from seroclass.classification.losses import domain_masses, evaluate_on_grid
from seroclass.classification.rules import ClassificationRule, RuleKind, ternary_costs
from seroclass.core.params import QuadratureSpec

_logger = logging.getLogger(__name__)

SWAP_TOLERANCE = 1e-10


@dataclass(frozen=True)
class PerturbationReport:
    max_decrease: float
    cells: int
    swaps: int
    neutral_swaps: int
    passed: bool

    def asdict(self):
        return asdict(self)


def _label_costs(rule: ClassificationRule, pos_values: np.ndarray, neg_values: np.ndarray, weights: np.ndarray):
    """Each cell's contribution to the loss under each label, keyed by label code."""
    w = rule.weights
    if rule.kind is RuleKind.BINARY:
        p = rule.prevalence
        return {
            1: weights * w.w_fp * (1.0 - p) * neg_values,
            -1: weights * w.w_fn * p * pos_values,
        }
    cost_pos, cost_neg = ternary_costs(rule, pos_values, neg_values)
    return {1: weights * cost_pos, -1: weights * cost_neg, 0: np.zeros_like(weights)}


def perturbation_optimality_check(
    rule: ClassificationRule, quad: QuadratureSpec = QuadratureSpec(256), tolerance: float = SWAP_TOLERANCE
) -> PerturbationReport:
    """
    Moves every quadrature cell, one at a time, from its label to each other
    label the rule allows and records the change of the discretized loss. The
    rule passes when no move lowers the loss by more than ``tolerance``.
    """
    evaluation = evaluate_on_grid(rule, quad)
    costs = _label_costs(rule, evaluation.pos_values, evaluation.neg_values, evaluation.grid.weights)
    labels = evaluation.labels
    current = np.zeros(labels.shape)
    for code, cost in costs.items():
        current[labels == code] = cost[labels == code]

    max_decrease = -np.inf
    swaps = neutral = 0
    for code, cost in costs.items():
        movable = labels != code
        delta = cost[movable] - current[movable]
        swaps += int(delta.size)
        neutral += int(np.sum(delta == 0.0))
        if delta.size:
            max_decrease = max(max_decrease, float(np.max(-delta)))

    passed = bool(max_decrease <= tolerance)
    if not passed:
        _logger.warning("A single-cell swap lowers the loss by %.3g", max_decrease)
    return PerturbationReport(float(max_decrease), int(labels.size), swaps, neutral, passed)


def holdout_mixture_mass(
    rule: ClassificationRule, quad: QuadratureSpec = QuadratureSpec(), p: Optional[float] = None
) -> float:
    """Mixture mass of the holdout region at prevalence ``p``, the rule's decision prevalence by default."""
    p = rule.decision_prevalence if p is None else p
    masses = domain_masses(rule, quad)
    return p * masses.P_H + (1.0 - p) * masses.N_H


def region_mixture_masses(
    rule: ClassificationRule, quad: QuadratureSpec = QuadratureSpec(), p: Optional[float] = None
) -> Tuple[float, float, float]:
    """Mixture mass of the (positive, negative, holdout) regions."""
    p = rule.decision_prevalence if p is None else p
    m = domain_masses(rule, quad)
    return p * m.P_P + (1 - p) * m.N_P, p * m.P_N + (1 - p) * m.N_N, p * m.P_H + (1 - p) * m.N_H
