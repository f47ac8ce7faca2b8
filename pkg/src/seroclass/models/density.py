"""Densities truncated to the square domain and renormalized by quadrature."""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Union

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from seroclass.core.measurements import LogPoint
from seroclass.core.params import (
    DomainSpec,
    Family,
    ModelParams,
    NegativeModelParams,
    PositiveModelParams,
    QuadratureScheme,
    QuadratureSpec,
)
from seroclass.models.quadrature import CONVERGENCE_TOLERANCE, QuadratureGrid, build_grid, integrate
from seroclass.models.shapes import negative_shape, positive_shape
from seroclass.utils.exceptions import (
    InvalidConfigException,
    InvalidParameterException,
    NonFiniteDensityException,
    UnknownFamilyException,
    ZeroMassException,
)

_logger = logging.getLogger(__name__)


def shape_function(family: Family, params: ModelParams) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    family = Family.parse(family)
    if family is Family.NEGATIVE:
        if not isinstance(params, NegativeModelParams):
            raise InvalidParameterException(f"Negative family needs NegativeModelParams, got {type(params).__name__}")
        return lambda x, y: negative_shape(params, x, y)
    if family is Family.POSITIVE:
        if not isinstance(params, PositiveModelParams):
            raise InvalidParameterException(f"Positive family needs PositiveModelParams, got {type(params).__name__}")
        return lambda x, y: positive_shape(params, x, y)
    raise UnknownFamilyException(f"Family '{family.value}' has no analytic shape")


@dataclass(frozen=True, eq=False)
class TruncatedDensity:
    """
    A probability density on ``domain``. Parametric densities carry their
    parameter record; gridded densities carry unnormalized values on a
    cell-centred grid over ``domain`` and are interpolated bilinearly between
    cell centres.

    Parameters
    ----------
    family:
        Which shape the density uses.
    params:
        Parameter record for parametric families, None for gridded densities.
    domain:
        The square the density is restricted to; it is zero outside.
    norm_const:
        Factor turning the shape into a density integrating to one over ``domain``.
    quadrature:
        The rule ``norm_const`` was computed with.
    convergence_delta:
        Relative change of ``norm_const`` against the half-resolution rule.
    grid_values:
        Unnormalized values at the cell centres, gridded densities only.
    """
    family: Family
    params: Optional[ModelParams]
    domain: DomainSpec
    norm_const: float
    quadrature: QuadratureSpec
    convergence_delta: float = 0.0
    grid_values: Optional[np.ndarray] = None
    _cache: Dict[object, object] = field(default_factory=dict, repr=False, compare=False)

    @property
    def is_gridded(self) -> bool:
        return self.family is Family.GRIDDED

    @property
    def converged(self) -> bool:
        return self.convergence_delta < CONVERGENCE_TOLERANCE

    @property
    def native_grid(self) -> QuadratureGrid:
        return build_grid(self.domain, self.quadrature)

    def _interpolator(self) -> RegularGridInterpolator:
        interpolator = self._cache.get("interpolator")
        if interpolator is None:
            nodes = self.native_grid.nodes
            interpolator = RegularGridInterpolator(
                (nodes, nodes), self.grid_values, method="linear", bounds_error=False, fill_value=None
            )
            self._cache["interpolator"] = interpolator
        return interpolator

    def shape(self, x, y) -> np.ndarray:
        """Unnormalized values; not masked by the domain."""
        if self.is_gridded:
            x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
            values = self._interpolator()(np.stack([x.ravel(), y.ravel()], axis=-1)).reshape(x.shape)
            return np.clip(values, 0.0, None)
        return shape_function(self.family, self.params)(x, y)

    def evaluate(self, x, y) -> np.ndarray:
        """Normalized density values, zero outside the domain."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        inside = self.domain.contains(x, y)
        return np.where(inside, self.norm_const * self.shape(x, y), 0.0)

    __call__ = evaluate

    def pdf(self, point: LogPoint) -> float:
        return float(self.evaluate(point.lx, point.ly))

    def values_on(self, grid: QuadratureGrid) -> np.ndarray:
        """Normalized values at the nodes of ``grid``, cached per grid."""
        key = (grid.domain, grid.spec)
        values = self._cache.get(key)
        if values is None:
            if self.is_gridded and grid.domain == self.domain and grid.spec == self.quadrature:
                values = self.norm_const * self.grid_values
            else:
                values = grid.evaluate(self.evaluate)
            values.setflags(write=False)
            self._cache[key] = values
        return values

    def mass(self, quad: Optional[QuadratureSpec] = None) -> float:
        grid = build_grid(self.domain, quad or self.quadrature)
        return grid.integrate(self.values_on(grid))


def _checked_norm_const(mass: float, description: str) -> float:
    if not math.isfinite(mass):
        raise NonFiniteDensityException(f"Mass of {description} is not finite")
    if mass <= 0.0:
        raise ZeroMassException(f"{description} has no mass on the domain")
    return 1.0 / mass


def normalize(
    family: Union[Family, str],
    params: Union[ModelParams, np.ndarray],
    domain: DomainSpec = DomainSpec(),
    quad: QuadratureSpec = QuadratureSpec(),
) -> TruncatedDensity:
    """
    Truncates a shape to ``domain`` and computes the constant that makes it
    integrate to one. For the gridded family ``params`` is the array of values
    at the cell centres of a ``tensor_midpoint`` grid over ``domain``.
    """
    family = Family.parse(family)
    if family is Family.GRIDDED:
        return gridded_density(np.asarray(params, dtype=float), domain)

    shape = shape_function(family, params)
    result = integrate(shape, domain, quad)
    norm_const = _checked_norm_const(result.value, f"{family.value} shape {params}")
    _logger.debug(
        "Normalized %s density: mass %.12g, relative delta %.3g", family.value, result.value, result.relative_delta
    )
    return TruncatedDensity(family, params, domain, norm_const, quad, result.relative_delta)


def gridded_density(values: np.ndarray, domain: DomainSpec = DomainSpec()) -> TruncatedDensity:
    """Density from values at the cell centres of a uniform grid over ``domain``."""
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise InvalidConfigException(f"Gridded values must be a square array, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise NonFiniteDensityException("Gridded values contain non-finite entries")
    if np.any(values < 0):
        raise InvalidParameterException("Gridded values must be non-negative")
    quad = QuadratureSpec(values.shape[0], QuadratureScheme.TENSOR_MIDPOINT)
    grid = build_grid(domain, quad)
    norm_const = _checked_norm_const(grid.integrate(values), "gridded density")
    values = np.array(values, dtype=float)
    values.setflags(write=False)
    return TruncatedDensity(Family.GRIDDED, None, domain, norm_const, quad, 0.0, values)


def to_gridded(density: TruncatedDensity, quad: QuadratureSpec) -> TruncatedDensity:
    """Samples ``density`` at the cell centres of ``quad.nodes_per_axis`` cells per axis."""
    grid = build_grid(density.domain, QuadratureSpec(quad.nodes_per_axis, QuadratureScheme.TENSOR_MIDPOINT))
    return gridded_density(np.array(density.values_on(grid)), density.domain)


def truncation_mass(
    family: Union[Family, str],
    params: ModelParams,
    domain: DomainSpec = DomainSpec(),
    quad: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Share of the untruncated model's probability that lies inside ``domain``."""
    family = Family.parse(family)
    shape = shape_function(family, params)
    # the positive shape leaves out the 1 / z_scale Jacobian
    scale = 1.0 / params.z_scale if family is Family.POSITIVE else 1.0
    return scale * integrate(shape, domain, quad).value


def to_linear_units(density: TruncatedDensity, q) -> float:
    """
    Density at ``q = (x, y)`` given in original measurement units, i.e. the
    log-space density times the Jacobian ``1 / (x y)``.
    """
    x, y = float(q[0]), float(q[1])
    if x <= 0.0 or y <= 0.0:
        raise InvalidParameterException(f"Linear-unit coordinates must be positive, got ({x}, {y})")
    return float(density.evaluate(math.log(x), math.log(y))) / (x * y)
