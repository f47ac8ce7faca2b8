"""Decision boundaries traced with marching squares."""
import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from seroclass.classification.rules import ClassificationRule, RuleKind
from seroclass.models.density import TruncatedDensity
from seroclass.utils.exceptions import InvalidConfigException

_logger = logging.getLogger(__name__)

MIN_RESOLUTION = 64

# Corners are ordered (i, j), (i+1, j), (i+1, j+1), (i, j+1) and the case index
# has corner 0 as its most significant bit. Saddles carry two resolutions,
# picked by the sign at the cell centre.
MARCHING_SQUARES_TABLE = [
    (False, []),  # 0000
    (False, [((0, 3), (2, 3))]),  # 0001
    (False, [((1, 2), (2, 3))]),  # 0010
    (False, [((0, 3), (1, 2))]),  # 0011
    (False, [((0, 1), (1, 2))]),  # 0100
    (True, ([((0, 1), (1, 2)), ((0, 3), (2, 3))], [((0, 1), (0, 3)), ((1, 2), (2, 3))])),  # 0101
    (False, [((0, 1), (2, 3))]),  # 0110
    (False, [((0, 1), (0, 3))]),  # 0111
    (False, [((0, 1), (0, 3))]),  # 1000
    (False, [((0, 1), (2, 3))]),  # 1001
    (True, ([((0, 1), (0, 3)), ((1, 2), (2, 3))], [((0, 1), (1, 2)), ((0, 3), (2, 3))])),  # 1010
    (False, [((0, 1), (1, 2))]),  # 1011
    (False, [((0, 3), (1, 2))]),  # 1100
    (False, [((1, 2), (2, 3))]),  # 1101
    (False, [((0, 3), (2, 3))]),  # 1110
    (False, []),  # 1111
]

_CORNER_OFFSETS = ((0, 0), (1, 0), (1, 1), (0, 1))

Node = Tuple[int, int]
EdgeKey = Tuple[Node, Node]


@dataclass(frozen=True, eq=False)
class Contour:
    """
    One polyline of a decision boundary. ``level`` names the boundary: the
    binary boundary, or the edge of the positive or negative region of a
    ternary rule; ``prevalence`` is the prevalence that boundary belongs to.
    """
    level: str
    prevalence: float
    points: np.ndarray

    @property
    def closed(self) -> bool:
        return len(self.points) > 2 and np.array_equal(self.points[0], self.points[-1])


def _lerp(p0: np.ndarray, p1: np.ndarray, v0: float, v1: float) -> np.ndarray:
    t = min(max(v0 / (v0 - v1), 0.0), 1.0)
    return p0 * (1 - t) + t * p1


def _chain(adjacency: Dict[EdgeKey, List[EdgeKey]]) -> List[List[EdgeKey]]:
    """Walks the segment graph into polylines, open ones first."""
    visited = set()
    polylines = []

    def walk(start: EdgeKey) -> List[EdgeKey]:
        path = [start]
        visited.add(start)
        current = start
        while True:
            nxt = next((e for e in adjacency[current] if e not in visited), None)
            if nxt is None:
                if len(path) > 2 and start in adjacency[current]:
                    path.append(start)
                return path
            path.append(nxt)
            visited.add(nxt)
            current = nxt

    ends = sorted(e for e, neighbours in adjacency.items() if len(neighbours) == 1)
    for start in ends + sorted(adjacency):
        if start not in visited:
            polylines.append(walk(start))
    return polylines


def marching_squares(
    nodes: np.ndarray, values: np.ndarray, center_sign: Callable[[float, float], bool]
) -> List[np.ndarray]:
    """
    Zero level set of ``values`` sampled at ``nodes`` x ``nodes`` (row-major),
    as polylines of (x, y) points. ``center_sign`` tells whether the function is
    positive at a cell centre and resolves saddle cells.
    """
    positive = values > 0
    n = len(nodes)
    mixed = np.argwhere(
        (positive[:-1, :-1] != positive[1:, :-1])
        | (positive[:-1, :-1] != positive[1:, 1:])
        | (positive[:-1, :-1] != positive[:-1, 1:])
    )
    edge_points: Dict[EdgeKey, np.ndarray] = {}
    adjacency: Dict[EdgeKey, List[EdgeKey]] = defaultdict(list)

    def edge_key(i: int, j: int, a: int, b: int) -> EdgeKey:
        na = (i + _CORNER_OFFSETS[a][0], j + _CORNER_OFFSETS[a][1])
        nb = (i + _CORNER_OFFSETS[b][0], j + _CORNER_OFFSETS[b][1])
        key = (na, nb) if na < nb else (nb, na)
        if key not in edge_points:
            (ia, ja), (ib, jb) = key
            edge_points[key] = _lerp(
                np.array([nodes[ia], nodes[ja]]), np.array([nodes[ib], nodes[jb]]), values[ia, ja], values[ib, jb]
            )
        return key

    for i, j in mixed:
        corners = [positive[i + di, j + dj] for di, dj in _CORNER_OFFSETS]
        index = sum(1 << (3 - c) for c, flag in enumerate(corners) if flag)
        saddle, segments = MARCHING_SQUARES_TABLE[index]
        if saddle:
            h = nodes[1] - nodes[0] if n > 1 else 0.0
            segments = segments[int(center_sign(nodes[i] + h / 2, nodes[j] + h / 2))]
        for (a0, a1), (b0, b1) in segments:
            start, end = edge_key(i, j, a0, a1), edge_key(i, j, b0, b1)
            adjacency[start].append(end)
            adjacency[end].append(start)

    return [np.array([edge_points[key] for key in path]) for path in _chain(adjacency)]


def _boundary_functions(rule: ClassificationRule) -> List[Tuple[str, float, Callable]]:
    w = rule.weights
    if rule.kind is RuleKind.BINARY:
        p = rule.prevalence
        return [("binary", p, lambda P, N: w.w_fn * p * P - w.w_fp * (1.0 - p) * N)]
    p_lo, p_hi = rule.interval.p_lo, rule.interval.p_hi
    return [
        ("positive", p_lo, lambda P, N: p_lo * P - w.w_fp * (1.0 - p_lo) * N),
        ("negative", p_hi, lambda P, N: w.w_fn * p_hi * P - (1.0 - p_hi) * N),
    ]


def boundary_contour(rule: ClassificationRule, resolution: int = 256) -> List[Contour]:
    """
    Level sets bounding the rule's decision regions on a ``resolution`` x
    ``resolution`` uniform grid; one family for a binary rule, two for a ternary
    rule. A rule with no boundary gives an empty list.
    """
    if resolution < MIN_RESOLUTION:
        raise InvalidConfigException(f"Contour resolution must be at least {MIN_RESOLUTION}, got {resolution}")
    domain = rule.domain
    nodes = np.linspace(domain.lo, domain.hi, resolution)
    x, y = np.meshgrid(nodes, nodes, indexing="ij")
    pos_values, neg_values = rule.pos_density(x, y), rule.neg_density(x, y)

    contours = []
    for level, prevalence, fn in _boundary_functions(rule):
        def center_sign(cx, cy, fn=fn):
            return bool(fn(rule.pos_density(cx, cy), rule.neg_density(cx, cy)) > 0)

        for points in marching_squares(nodes, fn(pos_values, neg_values), center_sign):
            contours.append(Contour(level, prevalence, points))
    _logger.debug("Traced %d polyline(s) for the %s rule", len(contours), rule.kind.value)
    return contours


def decision_boundaries(
    pos_density: TruncatedDensity,
    neg_density: TruncatedDensity,
    prevalences: Sequence[float],
    resolution: int = 256,
) -> List[Contour]:
    """Binary boundaries for a range of presumed prevalences."""
    contours = []
    for p in prevalences:
        contours.extend(boundary_contour(ClassificationRule.binary(pos_density, neg_density, p), resolution))
    return contours


def contours_to_frame(contours: Sequence[Contour]) -> pd.DataFrame:
    frames = [
        pd.DataFrame({
            "polyline_id": polyline_id,
            "level": contour.level,
            "prevalence": contour.prevalence,
            "x": contour.points[:, 0],
            "y": contour.points[:, 1],
        })
        for polyline_id, contour in enumerate(contours)
    ]
    if not frames:
        return pd.DataFrame(columns=["polyline_id", "level", "prevalence", "x", "y"])
    return pd.concat(frames, ignore_index=True)
