import json
from pathlib import Path

import pytest

from ispace import core, ebg

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text()


def fixture_json(name: str):
    return json.loads(fixture_text(name))


@pytest.fixture(scope="session")
def congress() -> core.Program:
    return core.parse(fixture_text("congress.ispace"))


@pytest.fixture(scope="session")
def congress_dem() -> core.Program:
    return core.parse(fixture_text("congress_dem.ispace"))


@pytest.fixture(scope="session")
def pigments() -> core.Program:
    return core.parse(fixture_text("pigments_mini.ispace"))


@pytest.fixture(scope="session")
def theory() -> ebg.Theory:
    return ebg.parse_theory(fixture_text("political.theory"))


@pytest.fixture(scope="session")
def nancy_facts() -> ebg.FactSet:
    return ebg.parse_facts(fixture_text("nancy.facts"))


@pytest.fixture(scope="session")
def president_facts() -> ebg.FactSet:
    return ebg.parse_facts(fixture_text("president.facts"))


@pytest.fixture(scope="session")
def virginia_facts() -> ebg.FactSet:
    return ebg.parse_facts(fixture_text("virginia.facts"))
