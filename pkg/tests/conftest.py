from __future__ import annotations

import pytest

from nash_harvest.growth import SpeciesParams
from nash_harvest.stands import ForestStand, Function, SpeciesShare
from nash_harvest.synth import generate_synthetic

ACCEPTANCE_LINES: list[str] = []

HEADER = "id,habitat,area_ha,function,species,cover,age,volume_m3_per_ha\n"
PINE_BIRCH_ROWS = (
    "12-24-1-02-109 -f,Fresh deciduous forest,3.25,Protective,Pine,0.7,59,212\n"
    "12-24-1-02-109 -f,Fresh deciduous forest,3.25,Protective,Birch,0.3,59,66\n"
)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def write_csv(tmp_path):
    def _write(body: str, header: str = HEADER, name: str = "stands.csv"):
        path = tmp_path / name
        path.write_text(header + body, encoding="utf-8")
        return path
    return _write


@pytest.fixture
def pine_birch_stand() -> ForestStand:
    return ForestStand(
        "12-24-1-02-109 -f", "fresh deciduous forest", 3.25, Function.PROTECTIVE,
        (SpeciesShare("pine", 0.7, 59, 212.0), SpeciesShare("birch", 0.3, 59, 66.0)),
    )


@pytest.fixture
def linear_params() -> SpeciesParams:
    """5 m3/ha per year from age 20 to 120."""
    return SpeciesParams("testwood", {a: 5.0 * a for a in range(20, 121, 10)}, 0.5, 0.4, 100)


@pytest.fixture(scope="session")
def district_200():
    return generate_synthetic(200, seed=11)


@pytest.fixture(scope="session")
def district_500():
    return generate_synthetic(500, seed=5, h0_size=60)
