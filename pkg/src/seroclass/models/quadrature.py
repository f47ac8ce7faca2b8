"""Tensor-product quadrature rules on the square domain."""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from seroclass.core.params import DomainSpec, QuadratureScheme, QuadratureSpec
from seroclass.utils.exceptions import NonFiniteDensityException

_logger = logging.getLogger(__name__)

# relative change between a rule and its half-resolution counterpart below
# which an integral is reported as converged
CONVERGENCE_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """
    Nodes and weights of a tensor rule. Values sampled on the grid are laid out
    row-major, ``values[i, j] = f(nodes[i], nodes[j])``.
    """
    domain: DomainSpec
    spec: QuadratureSpec
    nodes: np.ndarray
    weights_1d: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.nodes), len(self.nodes)

    @property
    def weights(self) -> np.ndarray:
        return np.outer(self.weights_1d, self.weights_1d)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.nodes, self.nodes, indexing="ij")

    @property
    def spacing(self) -> float:
        """Cell width of uniform schemes; NaN for Gauss-Legendre."""
        if self.spec.scheme is QuadratureScheme.TENSOR_GAUSS_LEGENDRE:
            return float("nan")
        if self.spec.scheme is QuadratureScheme.TENSOR_MIDPOINT:
            return self.domain.width / self.spec.nodes_per_axis
        return self.domain.width / (self.spec.nodes_per_axis - 1)

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(self.weights * values))

    def evaluate(self, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
        x, y = self.mesh()
        values = np.asarray(fn(x, y), dtype=float)
        if not np.all(np.isfinite(values)):
            raise NonFiniteDensityException(
                f"{int(np.sum(~np.isfinite(values)))} non-finite value(s) on the "
                f"{self.spec.nodes_per_axis}x{self.spec.nodes_per_axis} {self.spec.scheme.value} grid"
            )
        return values


def _nodes_and_weights(domain: DomainSpec, spec: QuadratureSpec) -> Tuple[np.ndarray, np.ndarray]:
    n = spec.nodes_per_axis
    if spec.scheme is QuadratureScheme.TENSOR_GAUSS_LEGENDRE:
        t, w = leggauss(n)
        half = domain.width / 2.0
        return domain.lo + half * (t + 1.0), half * w
    if spec.scheme is QuadratureScheme.TENSOR_TRAPEZOID:
        nodes = np.linspace(domain.lo, domain.hi, n)
        h = domain.width / (n - 1)
        weights = np.full(n, h)
        weights[0] = weights[-1] = h / 2.0
        return nodes, weights
    h = domain.width / n
    return domain.lo + (np.arange(n) + 0.5) * h, np.full(n, h)


@lru_cache(maxsize=32)
def build_grid(domain: DomainSpec, spec: QuadratureSpec) -> QuadratureGrid:
    nodes, weights = _nodes_and_weights(domain, spec)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureGrid(domain, spec, nodes, weights)


@dataclass(frozen=True)
class IntegralResult:
    value: float
    coarse_value: float

    @property
    def relative_delta(self) -> float:
        if self.value == 0.0:
            return 0.0 if self.coarse_value == 0.0 else float("inf")
        return abs(self.value - self.coarse_value) / abs(self.value)

    @property
    def converged(self) -> bool:
        return self.relative_delta < CONVERGENCE_TOLERANCE


def integrate(
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray], domain: DomainSpec, spec: QuadratureSpec
) -> IntegralResult:
    """
    Integrates ``fn`` over ``domain`` with ``spec`` and with the half-resolution
    rule, so callers can report whether the value has settled.
    """
    fine = build_grid(domain, spec)
    coarse = build_grid(domain, spec.coarsened())
    result = IntegralResult(fine.integrate(fine.evaluate(fn)), coarse.integrate(coarse.evaluate(fn)))
    if not result.converged:
        _logger.warning(
            "Quadrature with %d nodes per axis has not converged (relative delta %.3g against %d nodes)",
            spec.nodes_per_axis, result.relative_delta, spec.coarsened().nodes_per_axis,
        )
    return result
