"""Mean plus three standard deviations of the negatives, per channel."""
from dataclasses import dataclass

import numpy as np

from seroclass.core.measurements import PointsLike, as_point_array
from seroclass.core.preconditions import AtLeastPoints, FinitePoints, check_preconditions
from seroclass.models.quadrature import QuadratureGrid


@dataclass(frozen=True)
class ThreeSigmaRule:
    """Everything beyond either threshold is positive; the box below both is negative."""
    t_x: float
    t_y: float

    def label_codes(self, points: PointsLike) -> np.ndarray:
        arr = as_point_array(points)
        positive = (arr[:, 0] > self.t_x) | (arr[:, 1] > self.t_y)
        return np.where(positive, 1, -1).astype(np.int8)

    def labels_on(self, grid: QuadratureGrid) -> np.ndarray:
        x, y = grid.mesh()
        return np.where((x > self.t_x) | (y > self.t_y), 1, -1).astype(np.int8)


def three_sigma_rule(neg_points: PointsLike, n_sigma: float = 3.0) -> ThreeSigmaRule:
    arr = as_point_array(neg_points)
    check_preconditions(arr, [AtLeastPoints(2, "negative points"), FinitePoints()])
    mean = arr.mean(axis=0)
    std = arr.std(axis=0, ddof=1)
    t_x, t_y = mean + n_sigma * std
    return ThreeSigmaRule(float(t_x), float(t_y))
