"""
Prevalence estimation from the fraction of samples falling in a rule's
positive region, and the classify-estimate-reclassify loop built on it.

For any region D, the expected fraction of samples inside D is
``p * P(D) + (1 - p) * N(D)``; solving for ``p`` gives an unbiased estimate
whatever region is used, as long as the two densities put different mass on it.
"""
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from seroclass.classification.losses import domain_masses
from seroclass.classification.rules import ClassificationRule, Label, Weights
from seroclass.core.measurements import PointsLike, as_point_array
from seroclass.core.params import QuadratureSpec
from seroclass.core.preconditions import InsideDomain, NonEmpty, check_preconditions, require_shared_domain
from seroclass.models.density import TruncatedDensity
from seroclass.utils.exceptions import InvalidConfigException, SeparationFailureException

_logger = logging.getLogger(__name__)

EPSILON_SEP = 1e-6


@dataclass(frozen=True)
class PrevalenceEstimate:
    p_hat: float
    q_bar_p: float
    p_p: float
    n_p: float
    clamped: bool
    sample_count: int
    raw_p_hat: float
    rule_prevalence: Optional[float] = None

    def asdict(self) -> Dict[str, Any]:
        return asdict(self)


def _check_points(points: PointsLike, rule: ClassificationRule) -> np.ndarray:
    arr = as_point_array(points)
    check_preconditions(arr, [NonEmpty("points"), InsideDomain(rule.domain)])
    return arr


def empirical_positive_fraction(points: PointsLike, rule: ClassificationRule) -> float:
    arr = _check_points(points, rule)
    return float(np.mean(rule.label_codes(arr) == Label.POSITIVE.value))


def _estimate_from_fraction(
    q_bar_p: float,
    sample_count: int,
    rule: ClassificationRule,
    quad: QuadratureSpec,
    epsilon_sep: float,
    trace: Sequence[PrevalenceEstimate] = (),
) -> PrevalenceEstimate:
    masses = domain_masses(rule, quad)
    return estimate_from_masses(
        q_bar_p, sample_count, masses.P_P, masses.N_P, rule.decision_prevalence, epsilon_sep, trace
    )


def estimate_from_masses(
    q_bar_p: float,
    sample_count: int,
    p_p: float,
    n_p: float,
    rule_prevalence: Optional[float] = None,
    epsilon_sep: float = EPSILON_SEP,
    trace: Sequence[PrevalenceEstimate] = (),
) -> PrevalenceEstimate:
    """Solves the observed positive fraction for the prevalence, given both densities' mass on the region."""
    if abs(p_p - n_p) <= epsilon_sep:
        raise SeparationFailureException(
            f"Positive and negative densities carry nearly equal mass on the positive region "
            f"(P_p={p_p:.3g}, N_p={n_p:.3g}); the prevalence cannot be estimated",
            trace=trace,
        )
    raw = (q_bar_p - n_p) / (p_p - n_p)
    p_hat = min(max(raw, 0.0), 1.0)
    if p_hat != raw:
        _logger.info("Prevalence estimate %.6g clamped to %.6g", raw, p_hat)
    return PrevalenceEstimate(
        p_hat=p_hat,
        q_bar_p=q_bar_p,
        p_p=p_p,
        n_p=n_p,
        clamped=p_hat != raw,
        sample_count=sample_count,
        raw_p_hat=raw,
        rule_prevalence=rule_prevalence,
    )


def estimate_prevalence(
    points: PointsLike,
    rule: ClassificationRule,
    quad: QuadratureSpec = QuadratureSpec(),
    epsilon_sep: float = EPSILON_SEP,
) -> PrevalenceEstimate:
    """
    Estimates the prevalence from the share of ``points`` in the rule's positive
    region. Holdout points count towards the sample size.
    """
    arr = _check_points(points, rule)
    q_bar_p = float(np.mean(rule.label_codes(arr) == Label.POSITIVE.value))
    return _estimate_from_fraction(q_bar_p, len(arr), rule, quad, epsilon_sep)


@dataclass(frozen=True, eq=False)
class AdaptiveResult:
    estimates: List[PrevalenceEstimate]
    final_rule: ClassificationRule
    labels: List[Tuple[str, Label]]
    converged: bool
    p_init: float
    label_codes: np.ndarray = field(repr=False, default=None)
    at_bound: bool = False

    @property
    def p_hat(self) -> float:
        return self.estimates[-1].p_hat

    @property
    def updates(self) -> List[float]:
        """Size of each prevalence update, starting from ``p_init``."""
        previous = [self.p_init] + [e.p_hat for e in self.estimates[:-1]]
        return [abs(e.p_hat - p) for e, p in zip(self.estimates, previous)]

    @property
    def is_contracting(self) -> bool:
        tail = self.updates[1:]
        return all(later <= earlier for earlier, later in zip(tail, tail[1:]))

    def label_counts(self) -> Dict[str, int]:
        return {label.text: int(np.sum(self.label_codes == label.value)) for label in Label}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p_init": self.p_init,
            "p_hat": self.p_hat,
            "converged": self.converged,
            "at_bound": self.at_bound,
            "iterations": len(self.estimates),
            "is_contracting": self.is_contracting,
            "label_counts": self.label_counts(),
            "estimates": [e.asdict() for e in self.estimates],
        }


def adaptive_classify(
    points: PointsLike,
    pos_density: TruncatedDensity,
    neg_density: TruncatedDensity,
    p_init: float = 0.5,
    tol: float = 1e-4,
    max_iter: int = 20,
    quad: QuadratureSpec = QuadratureSpec(),
    sample_ids: Optional[Sequence[str]] = None,
    weights: Weights = Weights(),
    epsilon_sep: float = EPSILON_SEP,
) -> AdaptiveResult:
    """
    Classifies at ``p_init``, estimates the prevalence from the resulting
    positive region, reclassifies at the estimate, and repeats until the
    estimate moves less than ``tol`` or ``max_iter`` estimates were made. The
    final labels come from the binary rule at the last estimate; ``max_iter=1``
    is a single estimate-then-reclassify step.

    An estimate clamped to 0 or 1 ends the loop as well, since the rule at that
    prevalence has an empty region. The result then has ``at_bound=True`` and
    ``converged`` stays False unless the last step was also below ``tol``.
    """
    if max_iter < 1 or tol <= 0:
        raise InvalidConfigException(f"Need max_iter >= 1 and tol > 0, got {max_iter} and {tol}")
    require_shared_domain(pos_density.domain, neg_density.domain)
    rule = ClassificationRule.binary(pos_density, neg_density, p_init, weights)
    arr = _check_points(points, rule)
    if sample_ids is not None and len(sample_ids) != len(arr):
        raise InvalidConfigException(f"Got {len(sample_ids)} sample ids for {len(arr)} points")

    # densities at the points do not change between iterations
    pos_values, neg_values = rule.densities_at(arr)

    estimates: List[PrevalenceEstimate] = []
    p_current, converged, at_bound = float(p_init), False, False
    for iteration in range(max_iter):
        codes = rule.labels_from_values(pos_values, neg_values)
        q_bar_p = float(np.mean(codes == Label.POSITIVE.value))
        estimate = _estimate_from_fraction(q_bar_p, len(arr), rule, quad, epsilon_sep, estimates)
        estimates.append(estimate)
        _logger.debug("Iteration %d: prevalence %.6g -> %.6g", iteration, p_current, estimate.p_hat)
        step = abs(estimate.p_hat - p_current)
        p_current = estimate.p_hat
        rule = ClassificationRule.binary(pos_density, neg_density, p_current, weights)
        if step < tol:
            converged = True
            break
        if p_current in (0.0, 1.0):
            # the rule at this prevalence no longer separates the densities
            _logger.info("Prevalence estimate reached %g; stopping", p_current)
            at_bound = True
            break

    if not (converged or at_bound):
        _logger.info("Adaptive classification stopped after %d iteration(s) without converging", len(estimates))
    codes = rule.labels_from_values(pos_values, neg_values)
    ids = sample_ids if sample_ids is not None else [str(i) for i in range(len(arr))]
    labels = [(sid, Label.from_code(code)) for sid, code in zip(ids, codes)]
    return AdaptiveResult(estimates, rule, labels, converged, float(p_init), codes, at_bound)
