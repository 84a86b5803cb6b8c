import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gridsweep.energy import PlatformSpec
from gridsweep.grid import GridModel, Span, Tower, load_grid
from gridsweep.energy import load_fleet

FIXTURES = Path(__file__).parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def atlas_grid() -> GridModel:
    return load_grid(FIXTURES / "atlas_grid.json")


@pytest.fixture(scope="session")
def atlas_fleet() -> list[PlatformSpec]:
    return load_fleet(FIXTURES / "atlas_fleet.json")


@pytest.fixture(scope="session")
def ridge_grid() -> GridModel:
    return load_grid(FIXTURES / "ridge_grid.json")


@pytest.fixture(scope="session")
def morphing_fleet() -> list[PlatformSpec]:
    return load_fleet(FIXTURES / "morphing_fleet.json")


def simple_rotor(**overrides) -> PlatformSpec:
    """A forgiving multirotor for unit tests."""
    base = dict(
        id="rotor", kind="multirotor", battery_capacity_wh=250.0, hover_power_w=400.0,
        v_inspect=10.0, v_cruise=15.0, drag_coeff=0.06, max_wind=12.0,
        reserve_fraction=0.1, range_limit=3000.0, transit_buffer=30.0,
    )
    base.update(overrides)
    return PlatformSpec(**base)


def single_span_grid(length: float = 400.0, terrain=None, sag: float = 1.0,
                     wind=(0.0, 0.0), stations=(), detail: bool = False) -> GridModel:
    """One horizontal span along +x starting 300 m from the control station."""
    from instances import flat_terrain

    towers = [
        Tower(id="A", position=(300.0, 0.0, 100.0), height=25.0),
        Tower(id="B", position=(300.0 + length, 0.0, 100.0), height=25.0),
    ]
    spans = [Span(id="s0", tower_a="A", tower_b="B", attachment_height=20.0,
                  sag_factor=sag, detail=detail)]
    return GridModel(
        towers=towers, spans=spans, stations=list(stations),
        terrain=terrain if terrain is not None else flat_terrain(),
        gcs_position=(0.0, 0.0, 100.0), wind=wind,
    )
