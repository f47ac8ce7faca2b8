"""JSON documents for densities; gridded values go to a CSV sidecar."""
import json
import logging
import os
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from seroclass.core.params import DomainSpec, Family, QuadratureSpec, params_from_dict
from seroclass.models.density import TruncatedDensity, gridded_density
from seroclass.utils.exceptions import InvalidConfigException, MissingInputException

_logger = logging.getLogger(__name__)

GRID_COLUMNS = ["node_x", "node_y", "value"]


def density_to_dict(density: TruncatedDensity, values_csv: Optional[str] = None) -> Dict[str, Any]:
    document: Dict[str, Any] = {
        "family": density.family.value,
        "domain": {"lo": density.domain.lo, "hi": density.domain.hi},
        "quadrature": density.quadrature.asdict(),
        "norm_const": density.norm_const,
        "convergence_delta": density.convergence_delta,
    }
    if density.is_gridded:
        document["values_csv"] = values_csv
    else:
        document["params"] = density.params.asdict()
    return document


def density_from_dict(document: Dict[str, Any], base_dir: str = ".") -> TruncatedDensity:
    try:
        family = Family.parse(document["family"])
        domain = DomainSpec(**document["domain"])
        quadrature = QuadratureSpec(**document["quadrature"])
    except (KeyError, TypeError) as e:
        raise InvalidConfigException(f"Malformed density document: {e}") from e

    if family is Family.GRIDDED:
        path = os.path.join(base_dir, document["values_csv"])
        return gridded_density(read_grid_values(path, quadrature.nodes_per_axis), domain)
    return TruncatedDensity(
        family,
        params_from_dict(family, document["params"]),
        domain,
        float(document["norm_const"]),
        quadrature,
        float(document.get("convergence_delta", 0.0)),
    )


def write_grid_values(density: TruncatedDensity, path: str) -> None:
    grid = density.native_grid
    x, y = grid.mesh()
    frame = pd.DataFrame({"node_x": x.ravel(), "node_y": y.ravel(), "value": density.grid_values.ravel()})
    frame.to_csv(path, index=False, float_format="%.17g")


def read_grid_values(path: str, nodes_per_axis: int) -> np.ndarray:
    if not os.path.exists(path):
        raise MissingInputException(f"Grid values file '{path}' does not exist")
    frame = pd.read_csv(path)
    if list(frame.columns) != GRID_COLUMNS or len(frame) != nodes_per_axis ** 2:
        raise InvalidConfigException(
            f"Grid values file '{path}' must have columns {GRID_COLUMNS} and {nodes_per_axis ** 2} rows"
        )
    return frame["value"].to_numpy(dtype=float).reshape(nodes_per_axis, nodes_per_axis)


def save_density(density: TruncatedDensity, path: str) -> None:
    """Writes the JSON document; a gridded density also gets ``<stem>.values.csv`` next to it."""
    values_csv = None
    if density.is_gridded:
        stem = os.path.splitext(os.path.basename(path))[0]
        values_csv = f"{stem}.values.csv"
        write_grid_values(density, os.path.join(os.path.dirname(path) or ".", values_csv))
    with open(path, "w") as f:
        json.dump(density_to_dict(density, values_csv), f, indent=2, sort_keys=True)
    _logger.info("Wrote %s density to %s", density.family.value, path)


def load_density(path: str) -> TruncatedDensity:
    if not os.path.exists(path):
        raise MissingInputException(f"Model file '{path}' does not exist")
    with open(path) as f:
        try:
            document = json.load(f)
        except json.JSONDecodeError as e:
            raise InvalidConfigException(f"Model file '{path}' is not valid JSON: {e}") from e
    return density_from_dict(document, os.path.dirname(path) or ".")
