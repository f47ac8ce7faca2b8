"""
Unnormalized shapes of the two density families.

Both families live in rotated coordinates: ``z`` runs along the diagonal
(overall antibody level) and ``w`` across it (channel imbalance). The
negative family is a gamma law in ``z`` with a Gaussian in ``w`` whose width
grows exponentially with ``z``; the positive family is a beta law in the
scaled diagonal coordinate with a Gaussian whose width grows like its square
root.
"""
import math
from typing import Tuple

import numpy as np
from scipy.special import betaln, gammaln, xlogy

from seroclass.core.measurements import LogPoint
from seroclass.core.params import NegativeModelParams, PositiveModelParams

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def rotate(x, y) -> Tuple[np.ndarray, np.ndarray]:
    """(x, y) to the diagonal and cross-diagonal coordinates (z, w)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (x + y) / _SQRT2, (x - y) / _SQRT2


def unrotate(u, w) -> Tuple[np.ndarray, np.ndarray]:
    return (u + w) / _SQRT2, (u - w) / _SQRT2


def negative_log_density(params: NegativeModelParams, z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """
    Log of the untruncated negative density at non-negative ``z``. The density
    is normalized over the plane: its z-marginal is exactly gamma(k, theta).
    """
    log_sigma = math.log(params.alpha) + z / params.beta
    log_gamma = xlogy(params.k - 1.0, z) - z / params.theta - gammaln(params.k) - params.k * math.log(params.theta)
    log_normal = -0.5 * ((w - params.mu) * np.exp(-log_sigma)) ** 2 - log_sigma - _LOG_SQRT_2PI
    return log_gamma + log_normal


def positive_log_density(params: PositiveModelParams, z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """
    Log of the untruncated positive density in (x, y) for ``0 < z / z_scale < 1``,
    including the 1 / z_scale Jacobian of the scaled diagonal coordinate.
    """
    t = z / params.z_scale
    log_t = np.log(t)
    log_sigma = math.log(params.theta) + 0.5 * log_t
    log_beta = (
        (params.alpha - 1.0) * log_t
        + (params.beta_shape - 1.0) * np.log1p(-t)
        - betaln(params.alpha, params.beta_shape)
    )
    log_normal = -0.5 * ((w - params.mu) * np.exp(-log_sigma)) ** 2 - log_sigma - _LOG_SQRT_2PI
    return log_beta + log_normal - math.log(params.z_scale)


def negative_support(params: NegativeModelParams, z: np.ndarray) -> np.ndarray:
    # the gamma law is finite at z = 0 only for k >= 1
    return z >= 0.0 if params.k >= 1.0 else z > 0.0


def positive_support(params: PositiveModelParams, z: np.ndarray) -> np.ndarray:
    t = z / params.z_scale
    return (t > 0.0) & (t < 1.0)


def negative_shape(params: NegativeModelParams, x, y) -> np.ndarray:
    """Vectorized negative shape; zero for z < 0, and at z = 0 when k > 1."""
    z, w = rotate(x, y)
    support = negative_support(params, z)
    out = np.zeros(np.broadcast(z, w).shape)
    if np.any(support):
        zs = np.broadcast_to(z, out.shape)[support]
        ws = np.broadcast_to(w, out.shape)[support]
        out[support] = np.exp(negative_log_density(params, zs, ws))
    return out


def positive_shape(params: PositiveModelParams, x, y) -> np.ndarray:
    """
    Vectorized positive shape, ``beta.pdf(t) * norm.pdf(w; mu, theta * sqrt(t))``
    with ``t = z / z_scale``; zero outside ``0 < t < 1``. Constant factors do not
    matter since truncation renormalizes.
    """
    z, w = rotate(x, y)
    support = positive_support(params, z)
    out = np.zeros(np.broadcast(z, w).shape)
    if np.any(support):
        zs = np.broadcast_to(z, out.shape)[support]
        ws = np.broadcast_to(w, out.shape)[support]
        out[support] = np.exp(positive_log_density(params, zs, ws) + math.log(params.z_scale))
    return out


def eval_negative_shape(params: NegativeModelParams, p: LogPoint) -> float:
    return float(negative_shape(params, p.lx, p.ly))


def eval_positive_shape(params: PositiveModelParams, p: LogPoint) -> float:
    return float(positive_shape(params, p.lx, p.ly))
