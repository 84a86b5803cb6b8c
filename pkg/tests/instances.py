"""Seeded random small instances for heuristic/exhaustive comparisons."""

from __future__ import annotations

import math
import random

import numpy as np

from gridsweep.energy import PlatformSpec
from gridsweep.grid import ChargingStation, GridModel, Span, TerrainRaster, Tower


def flat_terrain(elevation: float = 100.0) -> TerrainRaster:
    rows = np.full((21, 21), elevation)
    return TerrainRaster(origin=(-1500.0, -1500.0), cell_size=150.0, elevations=rows)


def random_instance(seed: int) -> tuple[GridModel, list[PlatformSpec]]:
    """A flat-world chain of 1-5 spans near the control station, with one or
    two rotorcraft. Endpoints stay within 1.2 km so everything is in range."""
    rng = random.Random(seed)
    n_spans = rng.randint(1, 5)

    while True:
        heading = rng.uniform(0, 2 * math.pi)
        x, y = rng.uniform(150, 400) * math.cos(heading), rng.uniform(150, 400) * math.sin(heading)
        points = [(x, y)]
        ok = True
        for _ in range(n_spans):
            heading += rng.uniform(-0.9, 0.9)
            step = rng.uniform(150, 400)
            x += step * math.cos(heading)
            y += step * math.sin(heading)
            if math.hypot(x, y) > 1200:
                ok = False
                break
            points.append((x, y))
        if ok:
            break

    towers = [Tower(id=f"T{i}", position=(px, py, 100.0), height=25.0)
              for i, (px, py) in enumerate(points)]
    spans = [Span(id=f"s{i}", tower_a=f"T{i}", tower_b=f"T{i+1}",
                  attachment_height=20.0, sag_factor=1.01)
             for i in range(len(points) - 1)]
    stations = []
    if rng.random() < 0.3:
        stations.append(ChargingStation(
            id="cs", span_id=spans[rng.randrange(len(spans))].id,
            offset_fraction=rng.choice((0.25, 0.5, 0.75)),
            harvest_mode=rng.choice(("baseline", "optimized")),
            primary_current=rng.uniform(55, 85),
        ))

    wind_heading = rng.uniform(0, 2 * math.pi)
    wind_mag = rng.uniform(0.0, 3.0)
    wind = (wind_mag * math.cos(wind_heading), wind_mag * math.sin(wind_heading))
    grid = GridModel(towers=towers, spans=spans, stations=stations,
                     terrain=flat_terrain(), gcs_position=(0.0, 0.0, 100.0), wind=wind)

    fleet = []
    for i in range(rng.randint(1, 2)):
        fleet.append(PlatformSpec(
            id=f"p{i}", kind="multirotor",
            battery_capacity_wh=rng.uniform(200, 300),
            hover_power_w=rng.uniform(380, 520),
            v_inspect=rng.uniform(8, 12), v_cruise=rng.uniform(14, 18),
            drag_coeff=rng.uniform(0.05, 0.07), max_wind=12.0,
            reserve_fraction=0.1, range_limit=2500.0, transit_buffer=30.0,
        ))
    return grid, fleet
