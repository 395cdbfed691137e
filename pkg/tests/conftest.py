from pathlib import Path

import pytest

from iseec.ontology import load_ontology

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def goldens_dir() -> Path:
    return Path(__file__).resolve().parent / "goldens"


@pytest.fixture(scope="session")
def port_graph():
    return load_ontology((FIXTURES / "port.ont").read_bytes())
