import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from noethersphere.catalog import load_catalog
from noethersphere.spacetime import LambdaBranch, Metric, parse_metric_text
from noethersphere.expr import ZERO


@pytest.fixture(scope="session")
def catalog():
    return load_catalog()


@pytest.fixture(scope="session")
def entries_by_id(catalog):
    return {e.entry_id: e for e in catalog}


@pytest.fixture(scope="session")
def schwarzschild(entries_by_id):
    return entries_by_id["I/5"].metric


@pytest.fixture(scope="session")
def flat_r2():
    return Metric(nu=ZERO, mu=ZERO, branch=LambdaBranch.RADIUS_SQUARED,
                  domain=(0.2, 20.0), name="flat")


@pytest.fixture(scope="session")
def de_sitter(entries_by_id):
    return entries_by_id["V/1"].metric
