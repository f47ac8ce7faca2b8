"""Measurement-noise kernels and their convolution with a density."""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from seroclass.core.params import QuadratureScheme, QuadratureSpec
from seroclass.models.density import TruncatedDensity, gridded_density
from seroclass.models.quadrature import build_grid
from seroclass.utils.exceptions import GridMismatchException, InvalidParameterException, PreconditionNotMetException

_logger = logging.getLogger(__name__)

NOISE_MASS_TOLERANCE = 1e-6
_SEPARABLE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class NoiseKernel:
    """
    Density of displacement vectors sampled on an odd, centred (m, m) grid with
    cell width ``spacing``; ``values[half, half]`` is the zero displacement.
    """
    values: np.ndarray
    spacing: float

    def __post_init__(self):
        m = self.values.shape
        if len(m) != 2 or m[0] != m[1] or m[0] % 2 != 1:
            raise InvalidParameterException(f"Noise kernel must be an odd square array, got shape {m}")
        if self.spacing <= 0:
            raise InvalidParameterException(f"Noise kernel spacing must be positive, got {self.spacing}")

    @property
    def half_width(self) -> int:
        return self.values.shape[0] // 2

    @property
    def mass(self) -> float:
        return float(np.sum(self.values)) * self.spacing ** 2


def delta_noise(spacing: float) -> NoiseKernel:
    return NoiseKernel(np.array([[1.0 / spacing ** 2]]), spacing)


def gaussian_noise(sigma: float, spacing: float, truncate: float = 6.0) -> NoiseKernel:
    """Isotropic Gaussian with standard deviation ``sigma``, normalized on its grid."""
    if sigma <= 0:
        raise InvalidParameterException(f"Noise sigma must be positive, got {sigma}")
    half = int(math.ceil(truncate * sigma / spacing))
    offsets = np.arange(-half, half + 1) * spacing
    profile = np.exp(-0.5 * (offsets / sigma) ** 2)
    profile /= profile.sum() * spacing
    return NoiseKernel(np.outer(profile, profile), spacing)


def _separate(values: np.ndarray):
    """Column and row factors when the kernel is an outer product, else None."""
    u, s, vt = np.linalg.svd(values)
    if len(s) > 1 and s[1] > _SEPARABLE_TOLERANCE * s[0]:
        return None
    scale = math.sqrt(s[0])
    column, row = u[:, 0] * scale, vt[0] * scale
    if column.sum() < 0:
        column, row = -column, -row
    return column, row


def convolve_noise(density: TruncatedDensity, noise: NoiseKernel, quad: QuadratureSpec) -> TruncatedDensity:
    """
    Discretized convolution of ``density`` with ``noise`` on the cell-centred grid
    of ``quad.nodes_per_axis`` cells over the density's domain.

    The result lives on the domain enlarged by the kernel half-width on each side,
    so no mass leaves the grid, and is renormalized there.
    """
    if abs(noise.mass - 1.0) > NOISE_MASS_TOLERANCE:
        raise PreconditionNotMetException(f"Noise kernel integrates to {noise.mass}, expected 1")
    grid = build_grid(density.domain, QuadratureSpec(quad.nodes_per_axis, QuadratureScheme.TENSOR_MIDPOINT))
    h = grid.spacing
    if not math.isclose(noise.spacing, h, rel_tol=1e-9):
        raise GridMismatchException(f"Noise kernel spacing {noise.spacing} does not match grid spacing {h}")

    values = density.values_on(grid)
    kernel = noise.values * h ** 2
    factors = _separate(kernel)
    if factors is None:
        out = convolve2d(values, kernel, mode="full")
    else:
        column, row = factors
        out = convolve2d(convolve2d(values, column[:, None], mode="full"), row[None, :], mode="full")

    margin = noise.half_width * h
    domain = density.domain if noise.half_width == 0 else density.domain.enlarged(margin)
    _logger.debug(
        "Convolved %s density with a %dx%d kernel; domain now [%g, %g]^2",
        density.family.value, noise.values.shape[0], noise.values.shape[1], domain.lo, domain.hi,
    )
    return gridded_density(np.clip(out, 0.0, None), domain)
