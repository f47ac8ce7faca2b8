"""Maximum-likelihood fits of the density families."""
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from numpy.random import default_rng
from scipy.optimize import minimize

from seroclass.core.measurements import PointsLike, as_point_array
from seroclass.core.params import Family, ModelParams, NegativeModelParams, PositiveModelParams
from seroclass.core.preconditions import AtLeastPoints, FinitePoints, check_preconditions
from seroclass.models.shapes import (
    negative_log_density,
    negative_support,
    positive_log_density,
    positive_support,
    rotate,
)
from seroclass.utils.exceptions import InvalidParameterException, OptimizerFailureException

_logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 10
# E[log chi^2_1], the offset between log squared residuals and log variance
_LOG_CHI2_MEAN = -1.2703628454614782


@dataclass(frozen=True)
class FitOptions:
    restarts: int = 5
    max_iter: int = 2000
    xatol: float = 1e-6
    fatol: float = 1e-10
    restart_scale: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1 or self.max_iter < 1:
            raise InvalidParameterException("FitOptions needs at least one restart and one iteration")


@dataclass(frozen=True)
class FitResult:
    params: ModelParams
    log_likelihood: float
    init_log_likelihood: float
    iterations: int
    converged: bool
    points_used: int
    points_dropped: int

    def asdict(self):
        return {
            "params": self.params.asdict(),
            "log_likelihood": self.log_likelihood,
            "init_log_likelihood": self.init_log_likelihood,
            "iterations": self.iterations,
            "converged": self.converged,
            "points_used": self.points_used,
            "points_dropped": self.points_dropped,
        }


def _family_functions(family: Family):
    if family is Family.NEGATIVE:
        return NegativeModelParams, negative_log_density, negative_support
    if family is Family.POSITIVE:
        return PositiveModelParams, positive_log_density, positive_support
    raise InvalidParameterException(f"Family '{family.value}' cannot be fitted by maximum likelihood")


def log_likelihood(family: Union[Family, str], params: ModelParams, points: PointsLike) -> float:
    """Sum of untruncated log densities; -inf if any point is outside the support."""
    family = Family.parse(family)
    _, log_density, support = _family_functions(family)
    z, w = rotate(*as_point_array(points).T)
    if not np.all(support(params, z)):
        return -math.inf
    return float(np.sum(log_density(params, z, w)))


def initial_guess(points: PointsLike, family: Union[Family, str], z_scale: float = 9.0) -> ModelParams:
    """Moment-based starting values for ``fit_mle``."""
    family = Family.parse(family)
    arr = as_point_array(points)
    check_preconditions(arr, [AtLeastPoints(2), FinitePoints()])
    z, w = rotate(arr[:, 0], arr[:, 1])
    mu = float(np.mean(w))
    if family is Family.NEGATIVE:
        z, w = z[z > 0], w[z > 0]
        mean, var = float(np.mean(z)), float(np.var(z))
        k = mean ** 2 / var
        theta = var / mean
        # log sigma(z) = log alpha + z / beta, fitted to log squared residuals
        log_sq = np.log((w - mu) ** 2 + 1e-300)
        slope, intercept = np.polyfit(z, 0.5 * (log_sq - _LOG_CHI2_MEAN), 1)
        beta = 1.0 / slope if slope > 0 else 10.0 * float(np.max(z))
        return NegativeModelParams(theta=theta, k=k, alpha=float(np.exp(intercept)), mu=mu, beta=beta)
    if family is Family.POSITIVE:
        t = np.clip(z / z_scale, 1e-6, 1.0 - 1e-6)
        mean, var = float(np.mean(t)), float(np.var(t))
        common = mean * (1.0 - mean) / var - 1.0
        theta = math.sqrt(float(np.mean((w - mu) ** 2 / t)))
        return PositiveModelParams(
            alpha=mean * common, beta_shape=(1.0 - mean) * common, theta=theta, mu=mu, z_scale=z_scale
        )
    raise InvalidParameterException(f"Family '{family.value}' has no moment estimate")


def fit_mle(
    points: PointsLike,
    family: Union[Family, str],
    init: Optional[ModelParams] = None,
    opts: FitOptions = FitOptions(),
) -> FitResult:
    """
    Maximizes the untruncated log-likelihood with Nelder-Mead on log-transformed
    positive parameters, restarting around the best point found so far.

    Points outside the family's support cannot be explained by any parameters and
    are dropped with a warning. Running out of iterations is not an error: the
    best parameters are returned with ``converged=False``.
    """
    family = Family.parse(family)
    cls, log_density, support = _family_functions(family)
    arr = as_point_array(points)
    check_preconditions(arr, [AtLeastPoints(MIN_FIT_POINTS, "points to fit"), FinitePoints()])

    if init is None:
        init = initial_guess(arr, family)
    if not isinstance(init, cls):
        raise InvalidParameterException(f"Initial parameters for the {family.value} family must be {cls.__name__}")

    z, w = rotate(arr[:, 0], arr[:, 1])
    fixed = init.fixed_values()
    inside = support(init, z)
    dropped = int(np.sum(~inside))
    if dropped:
        _logger.warning("Dropping %d point(s) outside the %s family's support", dropped, family.value)
        warnings.warn(f"{dropped} point(s) outside the {family.value} support were ignored")
        z, w = z[inside], w[inside]
        check_preconditions(np.column_stack([z, w]), [AtLeastPoints(MIN_FIT_POINTS, "points inside the support")])
    n = len(z)

    def objective(vector: np.ndarray) -> float:
        try:
            params = cls.from_vector(vector, **fixed)
        except InvalidParameterException:
            return math.inf
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            value = -float(np.sum(log_density(params, z, w))) / n
        return value if math.isfinite(value) else math.inf

    x0 = init.to_vector()
    init_value = objective(x0)
    if not math.isfinite(init_value):
        raise InvalidParameterException(f"Log-likelihood is not finite at the initial parameters {init}")

    rng = default_rng(opts.seed)
    best_x, best_value, iterations, converged = x0, init_value, 0, False
    for attempt in range(opts.restarts):
        start = best_x if attempt == 0 else best_x + rng.normal(0.0, opts.restart_scale, size=x0.shape)
        result = _minimize(objective, start, opts)
        iterations += int(result.nit)
        _logger.debug("Restart %d: mean negative log-likelihood %.10g", attempt, result.fun)
        if result.fun <= best_value:
            best_x, best_value, converged = result.x, float(result.fun), bool(result.success)

    if not math.isfinite(best_value):
        raise OptimizerFailureException(f"No finite log-likelihood found for the {family.value} family")
    if not converged:
        _logger.warning("Fit of the %s family stopped at the iteration limit", family.value)

    return FitResult(
        params=cls.from_vector(best_x, **fixed),
        log_likelihood=-best_value * n,
        init_log_likelihood=-init_value * n,
        iterations=iterations,
        converged=converged,
        points_used=n,
        points_dropped=dropped,
    )


def _minimize(objective: Callable[[np.ndarray], float], start: np.ndarray, opts: FitOptions):
    return minimize(
        objective,
        start,
        method="Nelder-Mead",
        options={"xatol": opts.xatol, "fatol": opts.fatol, "maxiter": opts.max_iter, "adaptive": True},
    )
