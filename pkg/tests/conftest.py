# -*- coding: utf-8 -*-
"""
    Shared fixtures live in tests/fixtures.py and are re-exported here.

    Tests marked ``large`` only run with ``--run-large``.
"""
import pytest

from tests.fixtures import (  # noqa:
    densities,
    log_csv,
    model_files,
    neg_density,
    pos_density,
    quad,
    raw_csv,
    raw_frame,
)


def pytest_addoption(parser):
    parser.addoption("--run-large", action="store_true", default=False, help="run long acceptance scenarios")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-large"):
        return
    skip_large = pytest.mark.skip(reason="needs --run-large")
    for item in items:
        if "large" in item.keywords:
            item.add_marker(skip_large)
