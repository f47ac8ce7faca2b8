import math

import numpy as np
import pytest

from seroclass.core.params import Family, NegativeModelParams
from seroclass.models.fitting import FitOptions, fit_mle, initial_guess, log_likelihood
from seroclass.models.sampling import draw_shape
from seroclass.utils.exceptions import InvalidParameterException, PreconditionNotMetException
from seroclass.validation.reference import REFERENCE_POSITIVE

# a wider gamma than the reference keeps the width growth identifiable
IDENTIFIABLE_NEGATIVE = NegativeModelParams(theta=0.3, k=4.0, alpha=0.07, mu=0.0, beta=2.5)

CASES = [(Family.NEGATIVE, IDENTIFIABLE_NEGATIVE), (Family.POSITIVE, REFERENCE_POSITIVE)]


def _assert_recovered(fitted, truth):
    for name, value in truth.asdict().items():
        if name == "mu":
            assert getattr(fitted, name) == pytest.approx(value, abs=0.01)
        else:
            assert getattr(fitted, name) == pytest.approx(value, rel=0.05), name


class TestFitMle:
    @pytest.mark.parametrize("family,truth", CASES)
    def test_recovers_parameters(self, family, truth):
        points = draw_shape(family, truth, 50_000, np.random.default_rng(21))
        result = fit_mle(points, family, opts=FitOptions(restarts=2))
        assert result.converged
        assert result.points_used == 50_000 and result.points_dropped == 0
        assert result.log_likelihood >= result.init_log_likelihood
        _assert_recovered(result.params, truth)

    @pytest.mark.large
    @pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
    @pytest.mark.parametrize("family,truth", CASES)
    def test_recovers_parameters_across_seeds(self, family, truth, seed):
        points = draw_shape(family, truth, 50_000, np.random.default_rng(seed))
        _assert_recovered(fit_mle(points, family, opts=FitOptions(restarts=2)).params, truth)

    def test_fit_beats_the_truth_on_its_own_sample(self):
        points = draw_shape(Family.POSITIVE, REFERENCE_POSITIVE, 2_000, np.random.default_rng(4))
        result = fit_mle(points, Family.POSITIVE, opts=FitOptions(restarts=2))
        assert result.log_likelihood >= log_likelihood(Family.POSITIVE, REFERENCE_POSITIVE, points) - 1e-6

    def test_iteration_limit_is_not_an_error(self):
        points = draw_shape(Family.NEGATIVE, IDENTIFIABLE_NEGATIVE, 500, np.random.default_rng(2))
        result = fit_mle(points, Family.NEGATIVE, opts=FitOptions(restarts=1, max_iter=1))
        assert not result.converged
        assert math.isfinite(result.log_likelihood)

    def test_drops_points_outside_support(self):
        points = draw_shape(Family.POSITIVE, REFERENCE_POSITIVE, 500, np.random.default_rng(6))
        beyond = np.array([[7.0, 7.0], [6.9, 6.8]])
        with pytest.warns(UserWarning, match="2 point"):
            result = fit_mle(np.vstack([points, beyond]), Family.POSITIVE, opts=FitOptions(restarts=1))
        assert result.points_dropped == 2
        assert result.points_used == 500

    def test_needs_enough_points(self):
        points = draw_shape(Family.POSITIVE, REFERENCE_POSITIVE, 5, np.random.default_rng(0))
        with pytest.raises(PreconditionNotMetException):
            fit_mle(points, Family.POSITIVE)

    def test_rejects_non_finite_points(self):
        points = draw_shape(Family.POSITIVE, REFERENCE_POSITIVE, 50, np.random.default_rng(0))
        points[3, 1] = np.nan
        with pytest.raises(PreconditionNotMetException):
            fit_mle(points, Family.POSITIVE)

    def test_gridded_family_cannot_be_fitted(self):
        points = draw_shape(Family.POSITIVE, REFERENCE_POSITIVE, 50, np.random.default_rng(0))
        with pytest.raises(InvalidParameterException):
            fit_mle(points, Family.GRIDDED)

    def test_init_must_match_family(self):
        points = draw_shape(Family.POSITIVE, REFERENCE_POSITIVE, 50, np.random.default_rng(0))
        with pytest.raises(InvalidParameterException):
            fit_mle(points, Family.POSITIVE, init=IDENTIFIABLE_NEGATIVE)


class TestInitialGuess:
    @pytest.mark.parametrize("family,truth", CASES)
    def test_lands_near_the_truth(self, family, truth):
        points = draw_shape(family, truth, 20_000, np.random.default_rng(8))
        guess = initial_guess(points, family)
        assert type(guess) is type(truth)
        assert guess.mu == pytest.approx(truth.mu, abs=0.02)
        assert guess.theta == pytest.approx(truth.theta, rel=0.2)

    def test_log_likelihood_outside_support(self):
        assert log_likelihood(Family.POSITIVE, REFERENCE_POSITIVE, np.array([[7.0, 7.0]])) == -math.inf
