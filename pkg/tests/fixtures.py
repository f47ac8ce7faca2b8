import numpy as np
import pandas as pd
import pytest
from numpy.random import default_rng

from seroclass.core.params import QuadratureSpec
from seroclass.models.serialization import save_density
from seroclass.validation.reference import reference_densities
from seroclass.validation.synthetic import draw_labeled_sample

# coarse enough to keep the suite fast, fine enough for 1e-6 normalization
TEST_QUAD = QuadratureSpec(256)


@pytest.fixture
def quad():
    return TEST_QUAD


@pytest.fixture
def densities():
    return reference_densities(TEST_QUAD)


@pytest.fixture
def pos_density(densities):
    return densities[0]


@pytest.fixture
def neg_density(densities):
    return densities[1]


@pytest.fixture
def raw_frame():

    return pd.DataFrame(
        [
            ("n1", 120.0, 80.0, 1.0, "negative", ""),
            ("n2", -350.0, 40.0, 1.0, "negative", ""),
            ("n3", 60.0, 15.0, 1.1, "Negative", ""),
            ("n4", 95.0, 70.0, 0.0, "negative", ""),
            ("p1", 4200.0, 3900.0, 0.9, "positive", "14"),
            ("p2", 3800.0, 5200.0, 1.2, "POSITIVE", "3"),
            ("p3", 6100.0, 4400.0, 1.0, "positive", ""),
            ("u1", 400.0, 300.0, 1.0, "unknown", ""),
        ],
        columns=["id", "rbd", "s1", "ref", "label", "days"],
    )


@pytest.fixture
def raw_csv(tmp_path, raw_frame):
    path = tmp_path / "raw.csv"
    raw_frame.to_csv(path, index=False)
    return str(path)


def write_log_sample(path, densities, p, size, seed):
    points, truth = draw_labeled_sample(densities[0], densities[1], p, size, default_rng(seed))
    pd.DataFrame({
        "sample_id": [f"s{i}" for i in range(size)],
        "lx": points[:, 0],
        "ly": points[:, 1],
        "label": np.where(truth, "positive", "negative"),
    }).to_csv(path, index=False, float_format="%.17g")
    return str(path)


@pytest.fixture
def log_csv(tmp_path, densities):
    return write_log_sample(tmp_path / "log.csv", densities, 0.2, 400, 3)


@pytest.fixture
def model_files(tmp_path, densities):
    pos_path, neg_path = str(tmp_path / "pos.json"), str(tmp_path / "neg.json")
    save_density(densities[0], pos_path)
    save_density(densities[1], neg_path)
    return pos_path, neg_path
