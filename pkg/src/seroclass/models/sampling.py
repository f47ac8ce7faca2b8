"""Random draws from the density families."""
import logging
from typing import List, Optional, Union

import numpy as np
from numpy.random import Generator, default_rng

from seroclass.core.measurements import LogPoint, as_log_points
from seroclass.core.params import Family, ModelParams, NegativeModelParams, PositiveModelParams
from seroclass.models.density import TruncatedDensity
from seroclass.models.shapes import unrotate
from seroclass.utils.exceptions import InvalidParameterException, LowAcceptanceException

_logger = logging.getLogger(__name__)

MIN_ACCEPTANCE_RATE = 1e-3
_MIN_BATCH = 1024
# draws seen before the acceptance floor is enforced
_MIN_DRAWS_FOR_RATE = 64 * _MIN_BATCH

SeedLike = Union[int, np.random.SeedSequence, Generator, None]


def _rng(seed: SeedLike) -> Generator:
    return seed if isinstance(seed, Generator) else default_rng(seed)


def draw_shape(family: Union[Family, str], params: ModelParams, n: int, rng: SeedLike = None) -> np.ndarray:
    """
    Draws ``n`` points from the untruncated model: the diagonal coordinate from
    its exact marginal (gamma, or scaled beta), the cross-diagonal coordinate
    from the conditional Gaussian, then rotated back to (x, y).
    """
    family = Family.parse(family)
    rng = _rng(rng)
    if family is Family.NEGATIVE and isinstance(params, NegativeModelParams):
        u = rng.gamma(params.k, params.theta, size=n)
        w = rng.normal(params.mu, params.alpha * np.exp(u / params.beta))
    elif family is Family.POSITIVE and isinstance(params, PositiveModelParams):
        t = rng.beta(params.alpha, params.beta_shape, size=n)
        u = params.z_scale * t
        w = rng.normal(params.mu, params.theta * np.sqrt(t))
    else:
        raise InvalidParameterException(f"Cannot draw from family '{family.value}' with {type(params).__name__}")
    x, y = unrotate(u, w)
    return np.column_stack([x, y])


def _sample_gridded(density: TruncatedDensity, n: int, rng: Generator) -> np.ndarray:
    grid = density.native_grid
    h = grid.spacing
    probabilities = (density.values_on(grid) * grid.weights).ravel()
    probabilities = probabilities / probabilities.sum()
    cells = rng.choice(probabilities.size, size=n, p=probabilities)
    i, j = np.unravel_index(cells, grid.shape)
    jitter = rng.uniform(-0.5, 0.5, size=(n, 2)) * h
    return np.column_stack([grid.nodes[i], grid.nodes[j]]) + jitter


def sample_array(density: TruncatedDensity, n: int, seed: SeedLike = None) -> np.ndarray:
    """
    Draws ``n`` points inside the density's domain as an (n, 2) array.
    Parametric densities are sampled by rejection against the domain.
    """
    if n < 0:
        raise InvalidParameterException(f"Sample size must be non-negative, got {n}")
    rng = _rng(seed)
    if n == 0:
        return np.empty((0, 2))
    if density.is_gridded:
        return _sample_gridded(density, n, rng)

    accepted: List[np.ndarray] = []
    count = 0
    drawn = 0
    kept = 0
    rate: Optional[float] = None
    while count < n:
        # oversample by the observed acceptance rate
        batch = max(_MIN_BATCH, int(1.1 * (n - count) / (rate or 1.0)))
        points = draw_shape(density.family, density.params, batch, rng)
        inside = points[density.domain.contains(points[:, 0], points[:, 1])]
        drawn += batch
        kept += len(inside)
        rate = kept / drawn
        if drawn >= _MIN_DRAWS_FOR_RATE and rate < MIN_ACCEPTANCE_RATE:
            raise LowAcceptanceException(
                f"Only {kept} of {drawn} draws fell inside the domain (rate {rate:.2g}); "
                f"check the {density.family.value} parameters {density.params}"
            )
        accepted.append(inside[: n - count])
        count += len(accepted[-1])
    _logger.debug("Drew %d %s points with acceptance rate %.4f", n, density.family.value, rate)
    return np.concatenate(accepted)


def sample(density: TruncatedDensity, n: int, seed: SeedLike = None) -> List[LogPoint]:
    return as_log_points(sample_array(density, n, seed))
