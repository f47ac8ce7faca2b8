import warnings
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from seroclass.classification.rules import ClassificationRule, Label, Weights
from seroclass.core.params import DomainSpec, Family, QuadratureSpec
from seroclass.core.preconditions import InsideDomain, check_preconditions
from seroclass.estimation.prevalence import adaptive_classify
from seroclass.models.density import normalize
from seroclass.models.fitting import FitOptions, fit_mle


def _positive_mask(y) -> np.ndarray:
    y = np.asarray(y)
    if y.dtype.kind in "OUS":
        return np.char.lower(y.astype(str)) == Label.POSITIVE.text
    return y.astype(float) > 0


class OptimalClassifier(BaseEstimator, ClassifierMixin):
    """
    Fits the negative and positive density families to labeled points in the
    log-measurement plane and labels new points with the loss-minimizing binary
    rule. With ``prevalence=None`` the prevalence of each batch passed to
    ``predict`` is estimated adaptively, starting from ``p_init``, and
    ``batch_prevalence`` reports it. Prediction leaves the fitted state alone.

    Labels are 1 for positive and 0 for negative. ``y`` may also hold the strings
    ``"positive"`` and ``"negative"``, or -1 for negative.
    """

    def __init__(
        self,
        prevalence: Optional[float] = None,
        p_init: float = 0.5,
        domain: DomainSpec = DomainSpec(),
        quad: QuadratureSpec = QuadratureSpec(),
        fit_options: FitOptions = FitOptions(),
        w_fp: float = 1.0,
        w_fn: float = 1.0,
    ):
        self.prevalence = prevalence
        self.p_init = p_init
        self.domain = domain
        self.quad = quad
        self.fit_options = fit_options
        self.w_fp = w_fp
        self.w_fn = w_fn

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float, ensure_min_samples=2)
        if X.shape[1] != 2:
            raise ValueError(f"Expected two columns (log channel values), got {X.shape[1]}")
        positive = _positive_mask(y)
        self.fit_results_ = {}
        densities = {}
        for family, mask in ((Family.POSITIVE, positive), (Family.NEGATIVE, ~positive)):
            result = fit_mle(X[mask], family, opts=self.fit_options)
            if not result.converged:
                warnings.warn(f"Warning: the {family.value} fit stopped at the iteration limit")
            self.fit_results_[family.value] = result
            densities[family] = normalize(family, result.params, self.domain, self.quad)
        self.pos_density_ = densities[Family.POSITIVE]
        self.neg_density_ = densities[Family.NEGATIVE]
        self.classes_ = np.array([0, 1])
        self.prevalence_ = None if self.prevalence is None else float(self.prevalence)
        return self

    def _weights(self) -> Weights:
        return Weights(self.w_fp, self.w_fn)

    def _checked(self, X) -> np.ndarray:
        check_is_fitted(self, ["pos_density_", "neg_density_"])
        X = check_array(X, dtype=float)
        check_preconditions(X, [InsideDomain(self.domain)])
        return X

    def _rule_for(self, X: np.ndarray) -> ClassificationRule:
        if self.prevalence_ is not None:
            return ClassificationRule.binary(self.pos_density_, self.neg_density_, self.prevalence_, self._weights())
        result = adaptive_classify(
            X, self.pos_density_, self.neg_density_, p_init=self.p_init, quad=self.quad, weights=self._weights()
        )
        if not (result.converged or result.at_bound):
            warnings.warn(f"Warning: prevalence estimate did not converge, using {result.p_hat:.4g}")
        return result.final_rule

    def batch_prevalence(self, X) -> float:
        """The prevalence the rule for ``X`` is built on: fixed, or estimated from ``X``."""
        return self._rule_for(self._checked(X)).decision_prevalence

    def predict(self, X) -> np.ndarray:
        X = self._checked(X)
        codes = self._rule_for(X).label_codes(X)
        return (codes == Label.POSITIVE.value).astype(int)

    def predict_proba(self, X) -> np.ndarray:
        """Posterior probabilities (negative, positive) at the rule's prevalence."""
        X = self._checked(X)
        p = self._rule_for(X).decision_prevalence
        pos_values, neg_values = self.pos_density_(X[:, 0], X[:, 1]), self.neg_density_(X[:, 0], X[:, 1])
        weighted_pos = p * pos_values
        total = weighted_pos + (1.0 - p) * neg_values
        vanishing = total <= 0.0
        if np.any(vanishing):
            warnings.warn(f"Warning: both densities vanish at {int(np.sum(vanishing))} point(s); reporting 0.5")
        posterior = np.divide(weighted_pos, total, out=np.full(len(X), 0.5), where=~vanishing)
        return np.column_stack([1.0 - posterior, posterior])
