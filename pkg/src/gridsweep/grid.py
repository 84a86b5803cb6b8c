"""Power-grid world model: towers, conductor spans, charging stations, terrain.

Everything lives in a local ENU Cartesian frame in meters (x east, y north,
z meters AMSL). A GridModel is immutable after load_grid() and safe to share
read-only across planner workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import serialize
from .errors import AltitudeError, GridError, RasterBoundsError, SchemaError

# Regulatory ceiling: maximum altitude above ground level, meters.
MAX_AGL_M = 120.0

HARVEST_MODES = ("baseline", "optimized")
_EPS = 1e-9

Point2 = tuple[float, float]
Point3 = tuple[float, float, float]


def dist2(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def dist3(a: Point3, b: Point3) -> float:
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2)


@dataclass(frozen=True)
class Tower:
    """A support tower. position is the tower base (x, y, ground elevation AMSL)."""

    id: str
    position: Point3
    height: float

    def __post_init__(self):
        if self.height <= 0:
            raise GridError(f"tower {self.id}: height must be > 0, got {self.height}")


@dataclass(frozen=True)
class Span:
    """A conductor segment between two towers; the atomic inspection unit.

    sag_factor is arc length / chord length. detail marks spans that need a
    hover-capable close-up pass even without a charging station on them.
    """

    id: str
    tower_a: str
    tower_b: str
    attachment_height: float
    sag_factor: float = 1.01
    detail: bool = False

    def __post_init__(self):
        if self.tower_a == self.tower_b:
            raise GridError(f"span {self.id}: tower_a and tower_b must differ")
        if not 1.0 <= self.sag_factor <= 1.2:
            raise GridError(f"span {self.id}: sag_factor {self.sag_factor} outside [1, 1.2]")


@dataclass(frozen=True)
class ChargingStation:
    """An energy-harvesting charge point clamped onto a span."""

    id: str
    span_id: str
    offset_fraction: float
    harvest_mode: str = "baseline"
    primary_current: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.offset_fraction <= 1.0:
            raise GridError(
                f"station {self.id}: offset_fraction {self.offset_fraction} outside [0, 1]"
            )
        if self.harvest_mode not in HARVEST_MODES:
            raise GridError(f"station {self.id}: unknown harvest_mode {self.harvest_mode!r}")
        if self.primary_current < 0:
            raise GridError(f"station {self.id}: primary_current must be >= 0")


@dataclass(eq=False)
class TerrainRaster:
    """Regular elevation grid. rows[j][i] is the elevation (m AMSL) at
    (origin_x + i * cell_size, origin_y + j * cell_size)."""

    origin: Point2
    cell_size: float
    elevations: np.ndarray

    def __post_init__(self):
        if self.cell_size <= 0:
            raise GridError(f"terrain: cell_size must be > 0, got {self.cell_size}")
        self.elevations = np.asarray(self.elevations, dtype=float)
        if self.elevations.ndim != 2 or self.elevations.size == 0:
            raise GridError("terrain: elevation grid must be a non-empty 2-D array")

    @property
    def extent(self) -> tuple[float, float, float, float]:
        rows, cols = self.elevations.shape
        x0, y0 = self.origin
        return (x0, y0, x0 + (cols - 1) * self.cell_size, y0 + (rows - 1) * self.cell_size)

    def contains(self, x: float, y: float) -> bool:
        xmin, ymin, xmax, ymax = self.extent
        return xmin - _EPS <= x <= xmax + _EPS and ymin - _EPS <= y <= ymax + _EPS

    def elevation_at(self, x: float, y: float) -> float:
        return float(self.elevations_at(np.array([x]), np.array([y]))[0])

    def elevations_at(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Bilinear interpolation at an array of points. Raises if any point
        lies outside the raster extent."""
        rows, cols = self.elevations.shape
        fx = (np.asarray(xs, dtype=float) - self.origin[0]) / self.cell_size
        fy = (np.asarray(ys, dtype=float) - self.origin[1]) / self.cell_size
        if np.any(fx < -1e-9) or np.any(fx > cols - 1 + 1e-9) or np.any(fy < -1e-9) or np.any(fy > rows - 1 + 1e-9):
            bad = np.argmax((fx < -1e-9) | (fx > cols - 1 + 1e-9) | (fy < -1e-9) | (fy > rows - 1 + 1e-9))
            raise RasterBoundsError(
                f"point ({float(xs[bad]):.1f}, {float(ys[bad]):.1f}) outside terrain raster extent {self.extent}"
            )
        fx = np.clip(fx, 0.0, cols - 1)
        fy = np.clip(fy, 0.0, rows - 1)
        i0 = np.minimum(fx.astype(int), cols - 2) if cols > 1 else np.zeros_like(fx, dtype=int)
        j0 = np.minimum(fy.astype(int), rows - 2) if rows > 1 else np.zeros_like(fy, dtype=int)
        tx = fx - i0
        ty = fy - j0
        e = self.elevations
        if cols == 1:
            tx = np.zeros_like(tx)
            i1 = i0
        else:
            i1 = i0 + 1
        if rows == 1:
            ty = np.zeros_like(ty)
            j1 = j0
        else:
            j1 = j0 + 1
        z00 = e[j0, i0]
        z10 = e[j0, i1]
        z01 = e[j1, i0]
        z11 = e[j1, i1]
        return (z00 * (1 - tx) * (1 - ty) + z10 * tx * (1 - ty)
                + z01 * (1 - tx) * ty + z11 * tx * ty)

    def profile(self, p1, p2) -> tuple[np.ndarray, np.ndarray]:
        """Terrain elevations sampled along the segment p1->p2 at steps of
        cell_size (endpoints always included). Returns (points_xy, elevations)."""
        d = dist2(p1, p2)
        n = max(1, math.ceil(d / self.cell_size))
        t = np.linspace(0.0, 1.0, n + 1)
        xs = p1[0] + t * (p2[0] - p1[0])
        ys = p1[1] + t * (p2[1] - p1[1])
        return np.column_stack([xs, ys]), self.elevations_at(xs, ys)


@dataclass(eq=False)
class GridModel:
    """Validated, immutable view of the inspection area."""

    towers: list[Tower]
    spans: list[Span]
    stations: list[ChargingStation]
    terrain: TerrainRaster
    gcs_position: Point3
    wind: Point2 = (0.0, 0.0)
    _tower_index: dict = field(init=False, repr=False)
    _span_index: dict = field(init=False, repr=False)
    _station_index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self._tower_index = {t.id: t for t in self.towers}
        self._span_index = {s.id: s for s in self.spans}
        self._station_index = {s.id: s for s in self.stations}

    def tower(self, tower_id: str) -> Tower:
        try:
            return self._tower_index[tower_id]
        except KeyError:
            raise GridError(f"unknown tower {tower_id!r}") from None

    def span(self, span_id: str) -> Span:
        try:
            return self._span_index[span_id]
        except KeyError:
            raise GridError(f"unknown span {span_id!r}") from None

    def station(self, station_id: str) -> ChargingStation:
        try:
            return self._station_index[station_id]
        except KeyError:
            raise GridError(f"unknown station {station_id!r}") from None

    def attachment_point(self, span: Span, end: str) -> Point3:
        """3-D conductor attachment point at span end 'a' or 'b'."""
        tower = self.tower(span.tower_a if end == "a" else span.tower_b)
        x, y, z = tower.position
        return (x, y, z + span.attachment_height)

    def station_point(self, station: ChargingStation) -> Point3:
        span = self.span(station.span_id)
        a = self.attachment_point(span, "a")
        b = self.attachment_point(span, "b")
        f = station.offset_fraction
        return (a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1]), a[2] + f * (b[2] - a[2]))

    def stations_on(self, span_id: str) -> list[ChargingStation]:
        return [s for s in self.stations if s.span_id == span_id]


def span_chord_length(span: Span, grid: GridModel) -> float:
    return dist3(grid.attachment_point(span, "a"), grid.attachment_point(span, "b"))


def span_length(span: Span, grid: GridModel) -> float:
    """Conductor arc length: 3-D chord between attachment points x sag_factor."""
    return span_chord_length(span, grid) * span.sag_factor


def total_span_length(grid: GridModel) -> float:
    return sum(span_length(s, grid) for s in grid.spans)


def validate_grid(grid: GridModel) -> list[str]:
    """Check all cross-references and invariants. Returns one message per
    violation; an empty list means the grid is valid."""
    errors: list[str] = []
    seen_towers: set[str] = set()
    for tower in grid.towers:
        if tower.id in seen_towers:
            errors.append(f"tower {tower.id}: duplicate id")
        seen_towers.add(tower.id)
        if not grid.terrain.contains(tower.position[0], tower.position[1]):
            errors.append(f"tower {tower.id}: outside terrain raster extent (raster too small)")
    seen_spans: set[str] = set()
    for span in grid.spans:
        if span.id in seen_spans:
            errors.append(f"span {span.id}: duplicate id")
        seen_spans.add(span.id)
        for end in (span.tower_a, span.tower_b):
            if end not in grid._tower_index:
                errors.append(f"span {span.id}: unknown tower {end!r} (dangling reference)")
    seen_stations: set[str] = set()
    for station in grid.stations:
        if station.id in seen_stations:
            errors.append(f"station {station.id}: duplicate id")
        seen_stations.add(station.id)
        if station.span_id not in grid._span_index:
            errors.append(f"station {station.id}: unknown span {station.span_id!r} (dangling reference)")
    if not grid.terrain.contains(grid.gcs_position[0], grid.gcs_position[1]):
        errors.append("gcs: outside terrain raster extent (raster too small)")
    return errors


def corridor_max_agl(p1, p2, altitude: float, grid: GridModel) -> tuple[float, Point2]:
    """Highest AGL reached when flying the segment at a constant altitude.
    Returns (max AGL, xy of the worst sample)."""
    points, elevations = grid.terrain.profile(p1, p2)
    idx = int(np.argmin(elevations))
    return altitude - float(elevations[idx]), (float(points[idx][0]), float(points[idx][1]))


def safe_transit_altitude(p1, p2, grid: GridModel, buffer: float) -> float:
    """Lowest constant AMSL altitude that keeps at least `buffer` meters AGL
    everywhere along the segment p1->p2.

    Raises AltitudeError if that altitude would exceed the 120 m AGL ceiling
    over the lowest terrain sample, and RasterBoundsError if the segment
    leaves the raster.
    """
    if not 0 < buffer <= MAX_AGL_M:
        raise ValueError(f"buffer must be in (0, {MAX_AGL_M}], got {buffer}")
    points, elevations = grid.terrain.profile(p1, p2)
    altitude = float(np.max(elevations)) + buffer
    low = int(np.argmin(elevations))
    worst_agl = altitude - float(elevations[low])
    if worst_agl > MAX_AGL_M + 1e-9:
        x, y = points[low]
        raise AltitudeError(
            f"no legal transit altitude on segment ({p1[0]:.0f},{p1[1]:.0f})->({p2[0]:.0f},{p2[1]:.0f}): "
            f"altitude {altitude:.1f} m would be {worst_agl:.1f} m AGL at ({x:.1f}, {y:.1f}) (limit {MAX_AGL_M:.0f})"
        )
    return altitude


# ---------------------------------------------------------------------------
# Grid file format


def grid_to_dict(grid: GridModel) -> dict:
    return {
        "format_version": serialize.FORMAT_VERSION,
        "towers": [
            {"id": t.id, "position": list(t.position), "height": t.height} for t in grid.towers
        ],
        "spans": [
            {
                "id": s.id,
                "tower_a": s.tower_a,
                "tower_b": s.tower_b,
                "attachment_height": s.attachment_height,
                "sag_factor": s.sag_factor,
                "detail": s.detail,
            }
            for s in grid.spans
        ],
        "stations": [
            {
                "id": s.id,
                "span_id": s.span_id,
                "offset_fraction": s.offset_fraction,
                "harvest_mode": s.harvest_mode,
                "primary_current": s.primary_current,
            }
            for s in grid.stations
        ],
        "terrain": {
            "origin": list(grid.terrain.origin),
            "cell_size": grid.terrain.cell_size,
            "rows": [[float(v) for v in row] for row in grid.terrain.elevations],
        },
        "gcs": list(grid.gcs_position),
        "wind": list(grid.wind),
    }


def grid_digest(grid: GridModel) -> str:
    return serialize.digest(grid_to_dict(grid))


def grid_from_dict(data: dict, ctx: str = "grid") -> GridModel:
    serialize.require_keys(
        data,
        required=("format_version", "towers", "spans", "stations", "terrain", "gcs", "wind"),
        optional=(),
        ctx=ctx,
    )
    serialize.check_version(data, ctx)

    towers = []
    for i, item in enumerate(data["towers"]):
        tctx = f"{ctx}.towers[{i}]"
        serialize.require_keys(item, ("id", "position", "height"), (), tctx)
        towers.append(
            Tower(
                id=serialize.get_string(item, "id", tctx),
                position=serialize.get_vector(item, "position", 3, tctx),
                height=serialize.get_number(item, "height", tctx),
            )
        )
    spans = []
    for i, item in enumerate(data["spans"]):
        sctx = f"{ctx}.spans[{i}]"
        serialize.require_keys(
            item, ("id", "tower_a", "tower_b", "attachment_height"), ("sag_factor", "detail"), sctx
        )
        spans.append(
            Span(
                id=serialize.get_string(item, "id", sctx),
                tower_a=serialize.get_string(item, "tower_a", sctx),
                tower_b=serialize.get_string(item, "tower_b", sctx),
                attachment_height=serialize.get_number(item, "attachment_height", sctx),
                sag_factor=serialize.get_number(item, "sag_factor", sctx) if "sag_factor" in item else 1.01,
                detail=bool(item.get("detail", False)),
            )
        )
    stations = []
    for i, item in enumerate(data["stations"]):
        sctx = f"{ctx}.stations[{i}]"
        serialize.require_keys(
            item, ("id", "span_id", "offset_fraction"), ("harvest_mode", "primary_current"), sctx
        )
        stations.append(
            ChargingStation(
                id=serialize.get_string(item, "id", sctx),
                span_id=serialize.get_string(item, "span_id", sctx),
                offset_fraction=serialize.get_number(item, "offset_fraction", sctx),
                harvest_mode=item.get("harvest_mode", "baseline"),
                primary_current=serialize.get_number(item, "primary_current", sctx)
                if "primary_current" in item
                else 0.0,
            )
        )
    tctx = f"{ctx}.terrain"
    terrain_data = data["terrain"]
    serialize.require_keys(terrain_data, ("origin", "cell_size", "rows"), (), tctx)
    rows = terrain_data["rows"]
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) and r for r in rows):
        raise SchemaError(f"{tctx}.rows: expected a non-empty list of non-empty rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise SchemaError(f"{tctx}.rows: ragged rows (all rows must have {width} entries)")
    terrain = TerrainRaster(
        origin=serialize.get_vector(terrain_data, "origin", 2, tctx),
        cell_size=serialize.get_number(terrain_data, "cell_size", tctx),
        elevations=np.array(rows, dtype=float),
    )

    grid = GridModel(
        towers=towers,
        spans=spans,
        stations=stations,
        terrain=terrain,
        gcs_position=serialize.get_vector(data, "gcs", 3, ctx),
        wind=serialize.get_vector(data, "wind", 2, ctx),
    )
    problems = validate_grid(grid)
    if problems:
        raise GridError(f"{ctx}: " + "; ".join(problems))
    return grid


def load_grid(path: str | Path) -> GridModel:
    """Parse and fully validate a grid file."""
    return grid_from_dict(serialize.load_path(path), ctx=str(path))


def write_grid(grid: GridModel, path: str | Path) -> None:
    serialize.dump_path(grid_to_dict(grid), path)
