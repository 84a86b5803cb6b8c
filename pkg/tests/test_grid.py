import math

import numpy as np
import pytest

from gridsweep.errors import AltitudeError, GridError, RasterBoundsError, SchemaError
from gridsweep.grid import (
    MAX_AGL_M,
    ChargingStation,
    GridModel,
    Span,
    TerrainRaster,
    Tower,
    grid_digest,
    grid_from_dict,
    grid_to_dict,
    load_grid,
    safe_transit_altitude,
    span_length,
    total_span_length,
    validate_grid,
    write_grid,
)

from conftest import single_span_grid
from instances import flat_terrain


def test_span_length_is_sagged_3d_chord():
    # 400 m horizontal, 20 m vertical, 1% sag
    towers = [
        Tower(id="A", position=(0.0, 0.0, 100.0), height=25.0),
        Tower(id="B", position=(400.0, 0.0, 120.0), height=25.0),
    ]
    span = Span(id="s", tower_a="A", tower_b="B", attachment_height=20.0, sag_factor=1.01)
    grid = GridModel(towers=towers, spans=[span], stations=[],
                     terrain=flat_terrain(), gcs_position=(0.0, 0.0, 100.0))
    expected = math.sqrt(400.0 ** 2 + 20.0 ** 2) * 1.01
    assert span_length(span, grid) == pytest.approx(expected, rel=1e-12)
    assert span_length(span, grid) == pytest.approx(404.5047, abs=1e-3)


def test_attachment_point_uses_tower_elevation():
    grid = single_span_grid()
    span = grid.spans[0]
    a = grid.attachment_point(span, "a")
    assert a == (300.0, 0.0, 120.0)


def test_station_point_interpolates_along_span():
    st = ChargingStation(id="cs", span_id="s0", offset_fraction=0.25,
                         harvest_mode="baseline", primary_current=60.0)
    grid = single_span_grid(length=400.0, stations=[st])
    p = grid.station_point(st)
    assert p == pytest.approx((400.0, 0.0, 120.0))


def test_bilinear_interpolation_matches_plane():
    # a plane z = 2x + 3y is reproduced exactly by bilinear interpolation
    xs = np.arange(5) * 10.0
    ys = np.arange(4) * 10.0
    rows = np.array([[2 * x + 3 * y for x in xs] for y in ys])
    raster = TerrainRaster(origin=(0.0, 0.0), cell_size=10.0, elevations=rows)
    for x, y in ((0.0, 0.0), (5.0, 5.0), (12.5, 17.5), (40.0, 30.0)):
        assert raster.elevation_at(x, y) == pytest.approx(2 * x + 3 * y, rel=1e-12)


def test_raster_bounds_enforced():
    raster = flat_terrain()
    with pytest.raises(RasterBoundsError, match="outside"):
        raster.elevation_at(1e6, 0.0)


def test_profile_includes_endpoints_and_steps_by_cell():
    raster = flat_terrain()
    points, elevations = raster.profile((0.0, 0.0), (450.0, 0.0))
    assert len(points) == math.ceil(450.0 / raster.cell_size) + 1
    assert tuple(points[0]) == (0.0, 0.0)
    assert tuple(points[-1]) == (450.0, 0.0)
    assert np.all(elevations == 100.0)


def test_safe_transit_altitude_adds_buffer_over_peak():
    def elev(x, y):
        return 100.0 + 60.0 * math.exp(-((x / 140.0) ** 2))

    rows = np.array([[elev(-600 + i * 50, -300 + j * 50) for i in range(25)]
                     for j in range(13)])
    raster = TerrainRaster(origin=(-600.0, -300.0), cell_size=50.0, elevations=rows)
    grid = GridModel(towers=[Tower(id="T", position=(0.0, 0.0, 160.0), height=25.0)],
                     spans=[], stations=[], terrain=raster,
                     gcs_position=(-500.0, 0.0, elev(-500, 0)))
    alt = safe_transit_altitude((-500.0, 0.0, 101.0), (500.0, 0.0, 101.0), grid, 30.0)
    assert alt == pytest.approx(190.0, abs=0.5)


def test_safe_transit_altitude_raises_when_ceiling_unreachable():
    # a 150 m wall next to low ground: clearing it breaks the 120 m ceiling
    def elev(x, y):
        return 100.0 + (150.0 if x > 250 else 0.0)

    rows = np.array([[elev(i * 50, j * 50) for i in range(11)] for j in range(5)])
    raster = TerrainRaster(origin=(0.0, 0.0), cell_size=50.0, elevations=rows)
    grid = GridModel(towers=[], spans=[], stations=[], terrain=raster,
                     gcs_position=(0.0, 0.0, 100.0))
    with pytest.raises(AltitudeError, match="AGL"):
        safe_transit_altitude((0.0, 0.0, 100.0), (500.0, 0.0, 100.0), grid, 40.0)
    assert MAX_AGL_M == 120.0


def test_validate_grid_names_offenders():
    towers = [Tower(id="A", position=(0.0, 0.0, 100.0), height=25.0),
              Tower(id="B", position=(100.0, 0.0, 100.0), height=25.0)]
    spans = [Span(id="s", tower_a="A", tower_b="ghost", attachment_height=10.0)]
    stations = [ChargingStation(id="cs", span_id="nope", offset_fraction=0.5,
                                harvest_mode="baseline", primary_current=50.0)]
    grid = GridModel(towers=towers, spans=spans, stations=stations,
                     terrain=flat_terrain(), gcs_position=(0.0, 0.0, 100.0))
    problems = validate_grid(grid)
    assert any("span s" in p and "ghost" in p for p in problems)
    assert any("station cs" in p and "nope" in p for p in problems)


def test_dataclass_validation():
    with pytest.raises(GridError, match="height"):
        Tower(id="T", position=(0.0, 0.0, 0.0), height=0.0)
    with pytest.raises(GridError, match="sag_factor"):
        Span(id="s", tower_a="A", tower_b="B", attachment_height=5.0, sag_factor=1.5)
    with pytest.raises(GridError, match="offset_fraction"):
        ChargingStation(id="c", span_id="s", offset_fraction=1.5)
    with pytest.raises(GridError, match="harvest_mode"):
        ChargingStation(id="c", span_id="s", offset_fraction=0.5, harvest_mode="turbo")


def test_grid_file_round_trip(tmp_path, atlas_grid):
    path = tmp_path / "grid.json"
    write_grid(atlas_grid, path)
    reloaded = load_grid(path)
    assert grid_digest(reloaded) == grid_digest(atlas_grid)
    assert total_span_length(reloaded) == pytest.approx(
        total_span_length(atlas_grid), rel=1e-9)
    # write -> load -> write is byte-stable
    path2 = tmp_path / "grid2.json"
    write_grid(reloaded, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_grid_schema_rejects_unknown_keys(atlas_grid):
    data = grid_to_dict(atlas_grid)
    data["surprise"] = 1
    with pytest.raises(SchemaError, match="surprise"):
        grid_from_dict(data)


def test_grid_load_rejects_dangling_reference(atlas_grid):
    data = grid_to_dict(atlas_grid)
    data["spans"][0]["tower_a"] = "missing-tower"
    with pytest.raises(GridError, match="missing-tower"):
        grid_from_dict(data)


def test_atlas_fixture_inventory(atlas_grid):
    assert total_span_length(atlas_grid) >= 10500.0
    assert len(atlas_grid.stations) == 1
    assert atlas_grid.stations[0].harvest_mode == "optimized"
    assert validate_grid(atlas_grid) == []
