"""Route construction for multi-vehicle conductor inspection.

A plan assigns every inspection task (one per span) to a vehicle route. Routes
are built by greedy cheapest insertion, patched with charge stops whenever the
battery would dip under its reserve, then polished by a first-improvement
local search. All tie-breaking is canonical, so planning is deterministic for
a given grid, fleet, and config.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

from . import serialize
from .energy import (
    MODE_HOVER,
    FlightSetting,
    PlatformSpec,
    WING_RETRACTED,
    harvest_power,
    hover_energy,
    leg_energy,
    resolve_flight,
    ground_speed_along_track,
    track_unit,
)
from .errors import (
    AltitudeError,
    InfeasibleTaskError,
    NoReachableStationError,
    PlanningError,
    WindError,
)
from .grid import GridModel, Point3, dist2, grid_digest, safe_transit_altitude, span_length

DIR_AB = "ab"
DIR_BA = "ba"
DIRECTIONS = (DIR_AB, DIR_BA)

A_TAKEOFF = "takeoff"
A_TRANSIT = "transit"
A_INSPECT = "inspect"
A_LAND = "land"
A_CHARGE = "charge"
A_RETURN = "return_home"
ACTION_KINDS = (A_TAKEOFF, A_TRANSIT, A_INSPECT, A_LAND, A_CHARGE, A_RETURN)

_EPS = 1e-6


@dataclass(frozen=True)
class InspectionTask:
    """One span to be flown end to end by a single vehicle."""

    id: str
    span_id: str
    length: float
    end_a: Point3
    end_b: Point3
    requires_hover_detail: bool = False
    required_speed: float | None = None

    def start_point(self, direction: str) -> Point3:
        return self.end_a if direction == DIR_AB else self.end_b

    def end_point(self, direction: str) -> Point3:
        return self.end_b if direction == DIR_AB else self.end_a


def generate_tasks(grid: GridModel) -> list[InspectionTask]:
    """One inspection task per span, ordered by span id."""
    tasks = []
    for span in sorted(grid.spans, key=lambda s: s.id):
        tasks.append(
            InspectionTask(
                id=f"t-{span.id}",
                span_id=span.id,
                length=span_length(span, grid),
                end_a=grid.attachment_point(span, "a"),
                end_b=grid.attachment_point(span, "b"),
                requires_hover_detail=span.detail,
            )
        )
    return tasks


@dataclass
class Action:
    """One atomic step of a route. Durations are seconds, energy is Wh
    (negative energy means the battery gained charge)."""

    kind: str
    start: Point3
    end: Point3
    duration: float
    energy_wh: float
    distance: float = 0.0
    airspeed: float = 0.0
    mode: str = MODE_HOVER
    wing_config: str = WING_RETRACTED
    cruise_altitude: float | None = None
    task_id: str | None = None
    span_id: str | None = None
    station_id: str | None = None
    direction: str | None = None


def action_to_dict(a: Action) -> dict:
    return {
        "kind": a.kind,
        "start": list(a.start),
        "end": list(a.end),
        "duration": a.duration,
        "energy_wh": a.energy_wh,
        "distance": a.distance,
        "airspeed": a.airspeed,
        "mode": a.mode,
        "wing_config": a.wing_config,
        "cruise_altitude": a.cruise_altitude,
        "task_id": a.task_id,
        "span_id": a.span_id,
        "station_id": a.station_id,
        "direction": a.direction,
    }


def action_from_dict(data: dict, ctx: str) -> Action:
    serialize.require_keys(
        data,
        required=("kind", "start", "end", "duration", "energy_wh", "distance", "airspeed",
                  "mode", "wing_config", "cruise_altitude", "task_id", "span_id",
                  "station_id", "direction"),
        optional=(),
        ctx=ctx,
    )
    if data["kind"] not in ACTION_KINDS:
        raise PlanningError(f"{ctx}: unknown action kind {data['kind']!r}")
    return Action(
        kind=data["kind"],
        start=serialize.get_vector(data, "start", 3, ctx),
        end=serialize.get_vector(data, "end", 3, ctx),
        duration=serialize.get_number(data, "duration", ctx),
        energy_wh=serialize.get_number(data, "energy_wh", ctx),
        distance=serialize.get_number(data, "distance", ctx),
        airspeed=serialize.get_number(data, "airspeed", ctx),
        mode=data["mode"],
        wing_config=data["wing_config"],
        cruise_altitude=data["cruise_altitude"],
        task_id=data["task_id"],
        span_id=data["span_id"],
        station_id=data["station_id"],
        direction=data["direction"],
    )


# A unit is ("task", task_id, direction) or ("charge", station_id).
Unit = tuple


@dataclass
class Route:
    platform_id: str
    units: list[Unit]
    actions: list[Action]

    @property
    def duration(self) -> float:
        return sum(a.duration for a in self.actions)

    @property
    def last_inspect_end(self) -> float:
        t = 0.0
        last = 0.0
        for a in self.actions:
            t += a.duration
            if a.kind == A_INSPECT:
                last = t
        return last

    @property
    def distance(self) -> float:
        return sum(a.distance for a in self.actions)

    @property
    def energy_used_wh(self) -> float:
        return sum(a.energy_wh for a in self.actions if a.energy_wh > 0)

    @property
    def energy_charged_wh(self) -> float:
        return -sum(a.energy_wh for a in self.actions if a.energy_wh < 0)

    @property
    def charge_stops(self) -> int:
        return sum(1 for a in self.actions if a.kind == A_CHARGE)


@dataclass
class Plan:
    routes: list[Route]
    grid_digest: str
    fleet: list[PlatformSpec]
    seed: int = 0
    config: dict = field(default_factory=dict)
    improvement_moves: int = 0

    @property
    def makespan(self) -> float:
        return max((r.last_inspect_end for r in self.routes), default=0.0)

    @property
    def mission_duration(self) -> float:
        return max((r.duration for r in self.routes), default=0.0)


def plan_makespan(plan: Plan) -> float:
    """Completion time of the last inspection across the fleet."""
    return plan.makespan


@dataclass(frozen=True)
class PlannerConfig:
    """Knobs for construction and local search.

    improvement_budget caps accepted local-search moves per search, which
    keeps planning deterministic. lns_rounds adds that many ruin-and-recreate
    restarts (remove lns_remove tasks at random, reinsert greedily, re-run the
    search, keep strict improvements); the removals draw from an RNG seeded by
    the plan seed, so reruns still agree byte for byte. wall_ms, when set,
    additionally stops each search after a wall-clock budget; results then
    depend on machine speed, so leave it None anywhere reproducibility
    matters.
    """

    improvement_budget: int = 400
    lns_rounds: int = 6
    lns_remove: int = 3
    wall_ms: float | None = None
    max_charges_per_route: int = 50

    def to_dict(self) -> dict:
        return {
            "improvement_budget": self.improvement_budget,
            "lns_rounds": self.lns_rounds,
            "lns_remove": self.lns_remove,
            "wall_ms": self.wall_ms,
            "max_charges_per_route": self.max_charges_per_route,
        }


@dataclass(frozen=True)
class TransitCost:
    duration: float
    energy_wh: float
    cruise_altitude: float
    distance: float
    airspeed: float
    mode: str
    wing_config: str


@dataclass
class RouteEval:
    """Outcome of realizing a unit sequence into actions with battery tracking."""

    actions: list[Action]
    feasible: bool
    violation_unit: int | None
    boundary_points: list[Point3]
    boundary_levels: list[float]
    duration: float
    last_inspect_end: float


class RouteBuilder:
    """Turns unit sequences into fully costed action lists for one grid.

    Caches transit legs, safe altitudes, and whole realized routes; the caches
    make the O(tasks^2) insertion scans affordable.
    """

    def __init__(self, grid: GridModel, tasks: list[InspectionTask]):
        self.grid = grid
        self.wind = grid.wind
        self.tasks = {t.id: t for t in tasks}
        self._alt_cache: dict = {}
        self._transit_cache: dict = {}
        self._eval_cache: dict = {}

    # -- altitude and transits -------------------------------------------

    def _safe_altitude(self, p1: Point3, p2: Point3, buffer: float) -> float:
        a, b = (p1[:2], p2[:2])
        key = (min(a, b), max(a, b), buffer)
        alt = self._alt_cache.get(key)
        if alt is None:
            alt = safe_transit_altitude(p1, p2, self.grid, buffer)
            self._alt_cache[key] = alt
        return alt

    def transit_cost(self, platform: PlatformSpec, p1: Point3, p2: Point3) -> TransitCost:
        key = (platform.id, p1, p2)
        cached = self._transit_cache.get(key)
        if cached is not None:
            return cached
        cost = transit_cost(platform, p1, p2, self.grid, builder=self)
        self._transit_cache[key] = cost
        return cost

    # -- actions -----------------------------------------------------------

    def _transit_action(self, platform: PlatformSpec, p1: Point3, p2: Point3,
                        kind: str = A_TRANSIT) -> Action | None:
        tc = self.transit_cost(platform, p1, p2)
        if tc.duration <= 0.0:
            return None
        return Action(
            kind=kind, start=p1, end=p2, duration=tc.duration, energy_wh=tc.energy_wh,
            distance=tc.distance, airspeed=tc.airspeed, mode=tc.mode,
            wing_config=tc.wing_config, cruise_altitude=tc.cruise_altitude,
        )

    def inspect_action(self, platform: PlatformSpec, task: InspectionTask,
                       direction: str) -> Action:
        start = task.start_point(direction)
        end = task.end_point(direction)
        v_req = platform.v_inspect
        if task.required_speed is not None:
            v_req = min(v_req, task.required_speed)
        setting = resolve_flight(platform, v_req, "inspect")
        gs = ground_speed_along_track(setting.airspeed, track_unit(start, end), self.wind)
        duration = task.length / gs
        return Action(
            kind=A_INSPECT, start=start, end=end, duration=duration,
            energy_wh=leg_energy(platform, setting, duration),
            distance=task.length, airspeed=setting.airspeed, mode=setting.mode,
            wing_config=setting.wing_config, task_id=task.id, span_id=task.span_id,
            direction=direction,
        )

    def _hover_event(self, platform: PlatformSpec, kind: str, point: Point3,
                     duration: float) -> Action:
        return Action(kind=kind, start=point, end=point, duration=duration,
                      energy_wh=hover_energy(platform, duration))

    def charge_actions(self, platform: PlatformSpec, station_id: str,
                       level_on_arrival: float) -> list[Action]:
        """Land, charge back to full, take off, at a charge point."""
        station = self.grid.station(station_id)
        point = self.grid.station_point(station)
        land = self._hover_event(platform, A_LAND, point, platform.landing_duration)
        level = level_on_arrival - land.energy_wh
        deficit = platform.battery_capacity_wh - level
        power = harvest_power(station.harvest_mode, station.primary_current)
        charge = Action(
            kind=A_CHARGE, start=point, end=point,
            duration=deficit * 3600.0 / power, energy_wh=-deficit,
            mode="perched", station_id=station_id,
        )
        takeoff = self._hover_event(platform, A_TAKEOFF, point, platform.takeoff_duration)
        return [land, charge, takeoff]

    # -- whole routes ------------------------------------------------------

    def realize(self, platform: PlatformSpec, units: tuple) -> RouteEval:
        key = (platform.id, units)
        cached = self._eval_cache.get(key)
        if cached is not None:
            return cached
        ev = self._realize_uncached(platform, units)
        self._eval_cache[key] = ev
        return ev

    def _realize_uncached(self, platform: PlatformSpec, units: tuple) -> RouteEval:
        gcs = self.grid.gcs_position
        reserve = platform.reserve_wh
        actions: list[Action] = []
        if not units:
            return RouteEval(actions, True, None, [gcs], [platform.battery_capacity_wh], 0.0, 0.0)

        level = platform.battery_capacity_wh
        feasible = True
        violation_unit: int | None = None
        boundary_points = []
        boundary_levels = []
        cur = gcs

        def push(action: Action | None, unit_idx: int | None):
            nonlocal level, feasible, violation_unit
            if action is None:
                return
            actions.append(action)
            level -= action.energy_wh
            if level < reserve - _EPS and feasible:
                feasible = False
                violation_unit = unit_idx

        push(self._hover_event(platform, A_TAKEOFF, gcs, platform.takeoff_duration), 0)
        boundary_points.append(cur)
        boundary_levels.append(level)

        for idx, unit in enumerate(units):
            if unit[0] == "task":
                task = self.tasks[unit[1]]
                direction = unit[2]
                start = task.start_point(direction)
                push(self._transit_action(platform, cur, start), idx)
                push(self.inspect_action(platform, task, direction), idx)
                cur = task.end_point(direction)
            else:
                station = self.grid.station(unit[1])
                point = self.grid.station_point(station)
                push(self._transit_action(platform, cur, point), idx)
                for a in self.charge_actions(platform, unit[1], level):
                    push(a, idx)
                cur = point
            boundary_points.append(cur)
            boundary_levels.append(level)

        home_idx = len(units)
        push(self._transit_action(platform, cur, gcs, kind=A_RETURN), home_idx)
        push(self._hover_event(platform, A_LAND, gcs, platform.landing_duration), home_idx)

        duration = sum(a.duration for a in actions)
        t = 0.0
        last_inspect = 0.0
        for a in actions:
            t += a.duration
            if a.kind == A_INSPECT:
                last_inspect = t
        return RouteEval(actions, feasible, violation_unit, boundary_points,
                         boundary_levels, duration, last_inspect)

    def stations_in_range(self, platform: PlatformSpec) -> list:
        gcs = self.grid.gcs_position
        usable = []
        for st in sorted(self.grid.stations, key=lambda s: s.id):
            if st.primary_current <= 0:
                continue
            if dist2(self.grid.station_point(st), gcs) <= platform.range_limit + _EPS:
                usable.append(st)
        return usable

    def insert_recharge_stops(self, platform: PlatformSpec, units: tuple,
                              max_charges: int = 50) -> tuple[tuple, RouteEval]:
        """Patch a unit sequence with charge stops until the battery reserve
        holds everywhere. Each stop is placed at the latest boundary from
        which a charge point is still reachable, preferring the stop that is
        quickest to divert to."""
        work = list(units)
        inserted = 0
        while True:
            ev = self.realize(platform, tuple(work))
            if ev.feasible:
                return tuple(work), ev
            if inserted >= max_charges:
                raise PlanningError(
                    f"platform {platform.id}: gave up after {inserted} charge stops; "
                    f"route still breaks its battery reserve"
                )
            placed = False
            v = ev.violation_unit if ev.violation_unit is not None else len(work)
            for boundary in range(min(v, len(work)), -1, -1):
                choice = self._pick_station(platform, work, ev, boundary)
                if choice is not None:
                    work.insert(boundary, ("charge", choice))
                    inserted += 1
                    placed = True
                    break
            if not placed:
                unit = work[v] if v < len(work) else None
                what = f"task {unit[1]}" if unit and unit[0] == "task" else "the return leg"
                raise NoReachableStationError(
                    f"platform {platform.id}: no charge point lets it finish {what} "
                    f"with its {platform.reserve_wh:.1f} Wh reserve intact"
                )

    def _pick_station(self, platform: PlatformSpec, work: list, ev: RouteEval,
                      boundary: int):
        if boundary > 0 and work[boundary - 1][0] == "charge":
            return None
        p_b = ev.boundary_points[boundary]
        level_b = ev.boundary_levels[boundary]
        reserve = platform.reserve_wh
        land_e = hover_energy(platform, platform.landing_duration)
        takeoff_e = hover_energy(platform, platform.takeoff_duration)
        if boundary < len(work):
            nxt = work[boundary]
            if nxt[0] == "task":
                resume = self.tasks[nxt[1]].start_point(nxt[2])
            else:
                resume = self.grid.station_point(self.grid.station(nxt[1]))
        else:
            resume = self.grid.gcs_position
        try:
            direct_e = self.transit_cost(platform, p_b, resume).energy_wh
        except AltitudeError:
            direct_e = math.inf
        best = None
        for st in self.stations_in_range(platform):
            sp = self.grid.station_point(st)
            try:
                tc_in = self.transit_cost(platform, p_b, sp)
                tc_out = self.transit_cost(platform, sp, resume)
            except AltitudeError:
                continue
            if level_b - tc_in.energy_wh - land_e < reserve - _EPS:
                continue
            level_resume = platform.battery_capacity_wh - takeoff_e - tc_out.energy_wh
            if level_resume <= level_b - direct_e + _EPS:
                continue
            key = (tc_in.duration, st.id)
            if best is None or key < best[0]:
                best = (key, st.id)
        return best[1] if best else None


def transit_cost(platform: PlatformSpec, p1: Point3, p2: Point3, grid: GridModel,
                 builder: RouteBuilder | None = None) -> TransitCost:
    """Cost of one point-to-point ferry leg: climb to a terrain-safe altitude,
    cruise level, descend. Vertical phases run at hover power."""
    d2 = dist2(p1, p2)
    if d2 < 1e-9 and abs(p1[2] - p2[2]) < 1e-9:
        return TransitCost(0.0, 0.0, max(p1[2], p2[2]), 0.0, 0.0, MODE_HOVER, WING_RETRACTED)
    if builder is not None:
        safe = builder._safe_altitude(p1, p2, platform.transit_buffer)
    else:
        safe = safe_transit_altitude(p1, p2, grid, platform.transit_buffer)
    alt = max(safe, p1[2], p2[2])
    if alt > safe:
        # endpoint forced us above the minimum; re-check the ceiling
        from .grid import MAX_AGL_M, corridor_max_agl

        agl, worst = corridor_max_agl(p1, p2, alt, grid)
        if agl > MAX_AGL_M + 1e-9:
            raise AltitudeError(
                f"platform {platform.id}: cruise at {alt:.1f} m would be {agl:.1f} m AGL "
                f"near ({worst[0]:.1f}, {worst[1]:.1f}) (limit {MAX_AGL_M:.0f})"
            )
    climb = abs(alt - p1[2]) / platform.v_vertical
    descend = abs(alt - p2[2]) / platform.v_vertical
    vertical_e = hover_energy(platform, climb + descend)
    if d2 < 1e-9:
        return TransitCost(climb + descend, vertical_e, alt,
                           abs(alt - p1[2]) + abs(alt - p2[2]), 0.0,
                           MODE_HOVER, WING_RETRACTED)
    setting = resolve_flight(platform, platform.v_cruise, "transit")
    gs = ground_speed_along_track(setting.airspeed, track_unit(p1, p2), grid.wind)
    t_cruise = d2 / gs
    energy = vertical_e + leg_energy(platform, setting, t_cruise)
    return TransitCost(
        duration=climb + t_cruise + descend,
        energy_wh=energy,
        cruise_altitude=alt,
        distance=abs(alt - p1[2]) + d2 + abs(alt - p2[2]),
        airspeed=setting.airspeed,
        mode=setting.mode,
        wing_config=setting.wing_config,
    )


# ---------------------------------------------------------------------------
# Eligibility


def platform_can_fly(platform: PlatformSpec, grid: GridModel) -> str | None:
    """None if the platform may operate in this grid's wind, else a reason."""
    w = math.hypot(*grid.wind)
    if w > platform.max_wind + _EPS:
        return f"wind {w:.1f} m/s exceeds its {platform.max_wind:.1f} m/s limit"
    if w >= platform.v_inspect:
        return f"wind {w:.1f} m/s is not below its {platform.v_inspect:.1f} m/s inspection speed"
    if w >= platform.v_cruise:
        return f"wind {w:.1f} m/s is not below its {platform.v_cruise:.1f} m/s cruise speed"
    return None


def task_rejection(platform: PlatformSpec, task: InspectionTask, grid: GridModel) -> str | None:
    """None if the platform could in principle fly this task, else a reason."""
    reason = platform_can_fly(platform, grid)
    if reason is not None:
        return reason
    if task.requires_hover_detail and not platform.can_hover_inspect:
        return "task needs a hover-capable close-up pass"
    gcs = grid.gcs_position
    for name, pt in (("a", task.end_a), ("b", task.end_b)):
        d = dist2(gcs, pt)
        if d > platform.range_limit + _EPS:
            return (f"span end {name} is {d:.0f} m from the control station, "
                    f"beyond its {platform.range_limit:.0f} m radio range")
    return None


# ---------------------------------------------------------------------------
# Construction


def _plan_objective(evals: list[RouteEval]) -> tuple[float, float]:
    makespan = max((e.last_inspect_end for e in evals), default=0.0)
    total = sum(e.duration for e in evals)
    return (makespan, total)


def _strip_charges(units: tuple) -> tuple:
    return tuple(u for u in units if u[0] == "task")


def _eligibility(grid: GridModel, fleet: list[PlatformSpec],
                 tasks: list[InspectionTask]) -> dict[str, list[int]]:
    eligible: dict[str, list[int]] = {}
    for task in tasks:
        reasons = []
        ok = []
        for pi, platform in enumerate(fleet):
            reason = task_rejection(platform, task, grid)
            if reason is None:
                ok.append(pi)
            else:
                reasons.append(f"{platform.id}: {reason}")
        if not ok:
            raise InfeasibleTaskError(
                f"task {task.id} (span {task.span_id}) fits no platform: " + "; ".join(reasons)
            )
        eligible[task.id] = ok
    return eligible


def _greedy_insert(builder: RouteBuilder, fleet: list[PlatformSpec],
                   eligible: dict[str, list[int]], routes: list[tuple],
                   pending: list[InspectionTask], config: PlannerConfig):
    """Cheapest insertion of each pending task into the given task-unit
    routes. Returns (task routes, routes with charges, evals)."""
    completed: list[tuple] = []
    evals: list[RouteEval] = []
    for pi, units in enumerate(routes):
        done, ev = builder.insert_recharge_stops(fleet[pi], units,
                                                 config.max_charges_per_route)
        completed.append(done)
        evals.append(ev)
    unassigned = sorted(pending, key=lambda t: t.id)

    while unassigned:
        best = None
        for task in unassigned:
            for pi in eligible[task.id]:
                platform = fleet[pi]
                base = routes[pi]
                for pos in range(len(base) + 1):
                    for direction in DIRECTIONS:
                        cand = base[:pos] + (("task", task.id, direction),) + base[pos:]
                        try:
                            done, ev = builder.insert_recharge_stops(
                                platform, cand, config.max_charges_per_route)
                        except (PlanningError, AltitudeError, WindError):
                            continue
                        trial = list(evals)
                        trial[pi] = ev
                        key = (*_plan_objective(trial), pi, task.id, pos, direction)
                        if best is None or key < best[0]:
                            best = (key, task, pi, done, ev)
        if best is None:
            names = ", ".join(t.id for t in unassigned)
            raise InfeasibleTaskError(
                f"no feasible insertion for remaining tasks: {names} "
                f"(battery or altitude limits block every placement)"
            )
        _, task, pi, done, ev = best
        routes[pi] = _strip_charges(done)
        completed[pi] = done
        evals[pi] = ev
        unassigned.remove(task)
    return routes, completed, evals


def construct_plan(grid: GridModel, fleet: list[PlatformSpec],
                   tasks: list[InspectionTask] | None = None,
                   config: PlannerConfig | None = None,
                   seed: int = 0,
                   builder: RouteBuilder | None = None) -> Plan:
    """Greedy cheapest-insertion construction.

    Repeatedly places the unassigned task whose best insertion (over vehicles,
    positions, and flight directions) yields the smallest fleet makespan.
    Charge stops are re-derived for every candidate, so battery feasibility is
    part of the insertion cost, not an afterthought.
    """
    if config is None:
        config = PlannerConfig()
    if tasks is None:
        tasks = generate_tasks(grid)
    if not fleet:
        raise PlanningError("fleet is empty")
    if builder is None:
        builder = RouteBuilder(grid, tasks)
    eligible = _eligibility(grid, fleet, tasks)
    routes, completed, evals = _greedy_insert(
        builder, fleet, eligible, [() for _ in fleet], list(tasks), config)

    plan_routes = [
        Route(platform_id=fleet[pi].id, units=list(completed[pi]),
              actions=evals[pi].actions)
        for pi in range(len(fleet))
    ]
    return Plan(routes=plan_routes, grid_digest=grid_digest(grid), fleet=list(fleet),
                seed=seed, config=config.to_dict())


# ---------------------------------------------------------------------------
# Local search


def _moves_relocate(routes: list[tuple]):
    for r1, src in enumerate(routes):
        for i in range(len(src)):
            for r2 in range(len(routes)):
                limit = len(routes[r2]) + (0 if r2 == r1 else 1)
                for j in range(limit):
                    for direction in DIRECTIONS:
                        yield ("relocate", r1, i, r2, j, direction)


def _moves_swap(routes: list[tuple]):
    for r1 in range(len(routes)):
        for r2 in range(r1 + 1, len(routes)):
            for i in range(len(routes[r1])):
                for j in range(len(routes[r2])):
                    for d1 in DIRECTIONS:
                        for d2 in DIRECTIONS:
                            yield ("swap", r1, i, r2, j, d1, d2)


def _moves_two_opt(routes: list[tuple]):
    for r, units in enumerate(routes):
        for i in range(len(units)):
            for j in range(i + 1, len(units)):
                yield ("two_opt", r, i, j)


def _moves_flip(routes: list[tuple]):
    for r, units in enumerate(routes):
        for i in range(len(units)):
            yield ("flip", r, i)


# routes short enough to re-sequence exhaustively as one move
_RESEQUENCE_LIMIT = 4


def _moves_resequence(routes: list[tuple]):
    import itertools

    for r, units in enumerate(routes):
        if not 1 < len(units) <= _RESEQUENCE_LIMIT:
            continue
        ids = sorted(u[1] for u in units)
        for perm in itertools.permutations(ids):
            for dirs in itertools.product(DIRECTIONS, repeat=len(perm)):
                cand = tuple(("task", tid, d) for tid, d in zip(perm, dirs))
                if cand != units:
                    yield ("resequence", r, cand)


def _flip_unit(unit: Unit) -> Unit:
    return ("task", unit[1], DIR_BA if unit[2] == DIR_AB else DIR_AB)


def _apply_move(routes: list[tuple], move) -> list[tuple] | None:
    out = [list(r) for r in routes]
    if move[0] == "relocate":
        _, r1, i, r2, j, direction = move
        unit = out[r1].pop(i)
        new_unit = ("task", unit[1], direction)
        out[r2].insert(j, new_unit)
        if r1 == r2 and i == j and new_unit == unit:
            return None
    elif move[0] == "swap":
        _, r1, i, r2, j, d1, d2 = move
        u1, u2 = out[r1][i], out[r2][j]
        out[r1][i] = ("task", u2[1], d2)
        out[r2][j] = ("task", u1[1], d1)
        if out[r1][i] == u1 and out[r2][j] == u2:
            return None
    elif move[0] == "resequence":
        _, r, cand = move
        out[r] = list(cand)
    elif move[0] == "two_opt":
        _, r, i, j = move
        seg = [_flip_unit(u) for u in reversed(out[r][i:j + 1])]
        out[r][i:j + 1] = seg
    else:
        _, r, i = move
        out[r][i] = _flip_unit(out[r][i])
    return [tuple(r) for r in out]


def improve_plan(grid: GridModel, fleet: list[PlatformSpec], plan: Plan,
                 config: PlannerConfig | None = None,
                 tasks: list[InspectionTask] | None = None,
                 builder: RouteBuilder | None = None) -> Plan:
    """First-improvement local search over task order, assignment, and
    flight direction. Moves are scanned in a fixed canonical order (relocate,
    swap, segment reversal, direction flip, short-route resequencing) and the
    first strictly better neighbour is taken; the scan restarts after every
    accepted move."""
    if config is None:
        config = PlannerConfig()
    if tasks is None:
        tasks = generate_tasks(grid)
    if builder is None:
        builder = RouteBuilder(grid, tasks)
    by_id = {p.id: i for i, p in enumerate(fleet)}
    if set(by_id) != {r.platform_id for r in plan.routes}:
        raise PlanningError("plan routes do not match the fleet platform ids")

    routes = [()] * len(fleet)
    for r in plan.routes:
        routes[by_id[r.platform_id]] = _strip_charges(tuple(r.units))

    eligible = {t.id: {p.id for p in fleet if task_rejection(p, t, grid) is None}
                for t in tasks}

    def evaluate(rts: list[tuple]):
        done = []
        evs = []
        for pi, units in enumerate(rts):
            d, ev = builder.insert_recharge_stops(fleet[pi], units,
                                                  config.max_charges_per_route)
            done.append(d)
            evs.append(ev)
        return done, evs, _plan_objective(evs)

    completed, evals, score = evaluate(routes)
    accepted = 0
    t0 = time.monotonic()

    def out_of_time() -> bool:
        return (config.wall_ms is not None
                and (time.monotonic() - t0) * 1000.0 > config.wall_ms)

    improving = accepted < config.improvement_budget
    while improving and not out_of_time():
        improving = False
        generators = (_moves_relocate, _moves_swap, _moves_two_opt, _moves_flip,
                      _moves_resequence)
        for gen in generators:
            for move in gen(routes):
                if out_of_time():
                    break
                if move[0] == "relocate":
                    unit = routes[move[1]][move[2]]
                    if fleet[move[3]].id not in eligible[unit[1]]:
                        continue
                elif move[0] == "swap":
                    u1 = routes[move[1]][move[2]]
                    u2 = routes[move[3]][move[4]]
                    if (fleet[move[3]].id not in eligible[u1[1]]
                            or fleet[move[1]].id not in eligible[u2[1]]):
                        continue
                cand = _apply_move(routes, move)
                if cand is None:
                    continue
                try:
                    c_done, c_evals, c_score = evaluate(cand)
                except (PlanningError, AltitudeError, WindError):
                    continue
                if (c_score[0] < score[0] - 1e-9
                        or (abs(c_score[0] - score[0]) <= 1e-9
                            and c_score[1] < score[1] - 1e-9)):
                    routes, completed, evals, score = cand, c_done, c_evals, c_score
                    accepted += 1
                    improving = accepted < config.improvement_budget
                    break
            else:
                continue
            break

    plan_routes = [
        Route(platform_id=fleet[pi].id, units=list(completed[pi]),
              actions=evals[pi].actions)
        for pi in range(len(fleet))
    ]
    return Plan(routes=plan_routes, grid_digest=plan.grid_digest, fleet=list(fleet),
                seed=plan.seed, config=config.to_dict(), improvement_moves=accepted)


def make_plan(grid: GridModel, fleet: list[PlatformSpec],
              config: PlannerConfig | None = None, seed: int = 0) -> Plan:
    """The standard pipeline: greedy construction, local search, then a few
    seeded ruin-and-recreate restarts that keep only strict improvements."""
    import random

    if config is None:
        config = PlannerConfig()
    tasks = generate_tasks(grid)
    builder = RouteBuilder(grid, tasks)
    by_id = {t.id: t for t in tasks}
    plan = construct_plan(grid, fleet, tasks, config, seed=seed, builder=builder)
    best = improve_plan(grid, fleet, plan, config, tasks=tasks, builder=builder)
    if len(tasks) <= 2:
        return best
    eligible = _eligibility(grid, fleet, tasks)

    def score_of(p: Plan) -> tuple[float, float]:
        return (p.makespan, sum(r.duration for r in p.routes))

    best_score = score_of(best)
    order = {p.id: i for i, p in enumerate(fleet)}
    for round_idx in range(config.lns_rounds):
        rng = random.Random(f"{seed}|ruin|{round_idx}")
        k = min(config.lns_remove, len(tasks) - 1)
        removed = rng.sample(sorted(by_id), k)
        routes: list[tuple] = [()] * len(fleet)
        for r in best.routes:
            kept = tuple(u for u in r.units
                         if u[0] == "task" and u[1] not in set(removed))
            routes[order[r.platform_id]] = kept
        try:
            if round_idx % 2 == 0:
                # kick: drop the removed tasks back in at random spots, then descend
                for tid in removed:
                    pi = rng.choice(eligible[tid])
                    pos = rng.randint(0, len(routes[pi]))
                    d = rng.choice(DIRECTIONS)
                    routes[pi] = (routes[pi][:pos] + (("task", tid, d),)
                                  + routes[pi][pos:])
                completed, evals = [], []
                for pi, units in enumerate(routes):
                    done, ev = builder.insert_recharge_stops(
                        fleet[pi], units, config.max_charges_per_route)
                    completed.append(done)
                    evals.append(ev)
            else:
                routes, completed, evals = _greedy_insert(
                    builder, fleet, eligible, routes,
                    [by_id[t] for t in sorted(removed)], config)
        except (PlanningError, AltitudeError, WindError):
            continue
        recreated = Plan(
            routes=[Route(platform_id=fleet[pi].id, units=list(completed[pi]),
                          actions=evals[pi].actions) for pi in range(len(fleet))],
            grid_digest=best.grid_digest, fleet=list(fleet), seed=seed,
            config=config.to_dict())
        cand = improve_plan(grid, fleet, recreated, config, tasks=tasks, builder=builder)
        cand_score = score_of(cand)
        if (cand_score[0] < best_score[0] - 1e-9
                or (abs(cand_score[0] - best_score[0]) <= 1e-9
                    and cand_score[1] < best_score[1] - 1e-9)):
            best, best_score = cand, cand_score
    return best
