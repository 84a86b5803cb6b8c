"""Deterministic flight simulation of a plan under a scenario.

The simulator replays each route action by action, recomputing durations and
power draw from the platform model and the scenario's actual wind (which may
differ from the wind the plan assumed). Time is continuous: each flight phase
gets its exact duration, and the dt grid only controls how densely the state
is sampled for traces and rule checks, so results do not drift with dt.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from pathlib import Path

from . import serialize
from .energy import (
    MODE_FORWARD_WING,
    PlatformSpec,
    harvest_power,
    ground_speed_along_track,
    power_draw,
    stall_speed,
    track_unit,
)
from .errors import DigestMismatchError, SchemaError, SimulationError, StallError, WindError
from .grid import MAX_AGL_M, GridModel, Point3, dist2, grid_digest
from .planner import (
    A_CHARGE,
    A_INSPECT,
    A_LAND,
    A_RETURN,
    A_TAKEOFF,
    A_TRANSIT,
    Action,
    Plan,
)

ANOMALY_KINDS = ("hotspot", "damaged_insulator", "vegetation", "missing_charge_point")

_EPS = 1e-6


@dataclass(frozen=True)
class Anomaly:
    """A latent defect planted on a span; detected when a vehicle sweeps past
    its position during an inspection pass."""

    id: str
    kind: str
    span_id: str
    offset_fraction: float

    def __post_init__(self):
        if self.kind not in ANOMALY_KINDS:
            raise SchemaError(f"anomaly {self.id}: unknown kind {self.kind!r}")
        if not 0.0 <= self.offset_fraction <= 1.0:
            raise SchemaError(f"anomaly {self.id}: offset_fraction outside [0, 1]")


@dataclass(frozen=True)
class Scenario:
    """Ground truth for one simulation run: actual wind, planted defects,
    sensor seed, and the trace sampling step."""

    id: str
    wind: tuple[float, float] = (0.0, 0.0)
    dt: float = 0.5
    seed: int = 0
    anomalies: tuple[Anomaly, ...] = ()

    def __post_init__(self):
        if self.dt <= 0:
            raise SchemaError(f"scenario {self.id}: dt must be > 0")


def scenario_to_dict(sc: Scenario) -> dict:
    return {
        "format_version": serialize.FORMAT_VERSION,
        "id": sc.id,
        "wind": list(sc.wind),
        "dt": sc.dt,
        "seed": sc.seed,
        "anomalies": [
            {"id": a.id, "kind": a.kind, "span_id": a.span_id,
             "offset_fraction": a.offset_fraction}
            for a in sc.anomalies
        ],
    }


def scenario_from_dict(data: dict, ctx: str = "scenario") -> Scenario:
    serialize.require_keys(data, ("format_version", "id", "wind", "dt", "seed", "anomalies"),
                           (), ctx)
    serialize.check_version(data, ctx)
    anomalies = []
    for i, item in enumerate(data["anomalies"]):
        actx = f"{ctx}.anomalies[{i}]"
        serialize.require_keys(item, ("id", "kind", "span_id", "offset_fraction"), (), actx)
        anomalies.append(Anomaly(
            id=serialize.get_string(item, "id", actx),
            kind=serialize.get_string(item, "kind", actx),
            span_id=serialize.get_string(item, "span_id", actx),
            offset_fraction=serialize.get_number(item, "offset_fraction", actx),
        ))
    seed = data["seed"]
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise SchemaError(f"{ctx}.seed: expected an integer")
    return Scenario(
        id=serialize.get_string(data, "id", ctx),
        wind=serialize.get_vector(data, "wind", 2, ctx),
        dt=serialize.get_number(data, "dt", ctx),
        seed=seed,
        anomalies=tuple(anomalies),
    )


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_dict(serialize.load_path(path), ctx=str(path))


def write_scenario(sc: Scenario, path: str | Path) -> None:
    serialize.dump_path(scenario_to_dict(sc), path)


# ---------------------------------------------------------------------------
# Result model


@dataclass
class Segment:
    """One constant-condition stretch of flight (or perch time)."""

    action_idx: int
    kind: str
    mode: str
    wing_config: str
    airspeed: float
    ground_speed: float
    power_w: float
    t_start: float
    t_end: float
    station_id: str | None = None


@dataclass
class Finding:
    anomaly_id: str
    kind: str
    span_id: str
    platform_id: str
    t: float
    offset_measured: float
    confidence: float


@dataclass
class Violation:
    platform_id: str
    rule: str
    t_start: float
    t_end: float
    worst: float
    detail: str


@dataclass
class PlatformTrace:
    """Sampled state history for one vehicle, plus per-route statistics."""

    platform_id: str
    t: list[float] = field(default_factory=list)
    x: list[float] = field(default_factory=list)
    y: list[float] = field(default_factory=list)
    z: list[float] = field(default_factory=list)
    battery_wh: list[float] = field(default_factory=list)
    seg_idx: list[int] = field(default_factory=list)
    segments: list[Segment] = field(default_factory=list)
    distance: float = 0.0
    flight_time: float = 0.0
    energy_used_wh: float = 0.0
    energy_charged_wh: float = 0.0
    final_battery_wh: float = 0.0
    charge_stops: int = 0
    last_inspect_end: float = 0.0
    end_time: float = 0.0


@dataclass
class SimResult:
    grid_digest: str
    plan_digest: str
    scenario: Scenario
    traces: list[PlatformTrace]
    findings: list[Finding]
    violations: list[Violation]
    measured_makespan: float
    mission_duration: float


# ---------------------------------------------------------------------------
# Simulation core


def _lerp(a: Point3, b: Point3, f: float) -> tuple[float, float, float]:
    return (a[0] + (b[0] - a[0]) * f, a[1] + (b[1] - a[1]) * f, a[2] + (b[2] - a[2]) * f)


def _phase_power(platform: PlatformSpec, mode: str, wing_config: str, airspeed: float) -> float:
    # a stalled wing is flown anyway and left for the rule check to flag
    try:
        return power_draw(platform, mode, wing_config, airspeed)
    except StallError:
        return platform.cruise_power_w


def _action_phases(platform: PlatformSpec, action: Action, level_wh: float,
                   grid: GridModel, wind) -> list[dict]:
    """Break an action into constant-velocity phases with exact durations.

    Each phase dict has p0, p1, duration, power_w, plus the flight condition.
    Charge durations are recomputed from the battery state on arrival, so the
    vehicle always leaves a charge point full even when the actual wind made
    the approach cost differ from the plan.
    """
    kind = action.kind
    if kind in (A_TAKEOFF, A_LAND):
        return [{
            "p0": action.start, "p1": action.end, "duration": action.duration,
            "power_w": platform.hover_power_w, "mode": "hover",
            "wing_config": action.wing_config, "airspeed": 0.0, "ground_speed": 0.0,
        }]
    if kind == A_CHARGE:
        if action.station_id is None:
            raise SimulationError("charge action without a station_id")
        station = grid.station(action.station_id)
        power = harvest_power(station.harvest_mode, station.primary_current)
        deficit = max(0.0, platform.battery_capacity_wh - level_wh)
        return [{
            "p0": action.start, "p1": action.end, "duration": deficit * 3600.0 / power,
            "power_w": -power, "mode": "perched", "wing_config": action.wing_config,
            "airspeed": 0.0, "ground_speed": 0.0, "station_id": action.station_id,
        }]
    if kind == A_INSPECT:
        try:
            gs = ground_speed_along_track(action.airspeed,
                                          track_unit(action.start, action.end), wind)
        except WindError as exc:
            raise SimulationError(f"platform {platform.id}: {exc}") from exc
        power = _phase_power(platform, action.mode, action.wing_config, action.airspeed)
        return [{
            "p0": action.start, "p1": action.end, "duration": action.distance / gs,
            "power_w": power, "mode": action.mode, "wing_config": action.wing_config,
            "airspeed": action.airspeed, "ground_speed": gs,
        }]
    if kind in (A_TRANSIT, A_RETURN):
        alt = action.cruise_altitude
        if alt is None:
            raise SimulationError(f"{kind} action without a cruise_altitude")
        p0, p1 = action.start, action.end
        top0 = (p0[0], p0[1], alt)
        top1 = (p1[0], p1[1], alt)
        phases = []
        climb = abs(alt - p0[2]) / platform.v_vertical
        if climb > 0:
            phases.append({
                "p0": p0, "p1": top0, "duration": climb,
                "power_w": platform.hover_power_w, "mode": "hover",
                "wing_config": action.wing_config, "airspeed": 0.0,
                "ground_speed": 0.0,
            })
        d2 = dist2(p0, p1)
        if d2 > 0:
            try:
                gs = ground_speed_along_track(action.airspeed, track_unit(p0, p1), wind)
            except WindError as exc:
                raise SimulationError(f"platform {platform.id}: {exc}") from exc
            power = _phase_power(platform, action.mode, action.wing_config, action.airspeed)
            phases.append({
                "p0": top0, "p1": top1, "duration": d2 / gs, "power_w": power,
                "mode": action.mode, "wing_config": action.wing_config,
                "airspeed": action.airspeed, "ground_speed": gs,
            })
        descend = abs(alt - p1[2]) / platform.v_vertical
        if descend > 0:
            phases.append({
                "p0": top1, "p1": p1, "duration": descend,
                "power_w": platform.hover_power_w, "mode": "hover",
                "wing_config": action.wing_config, "airspeed": 0.0,
                "ground_speed": 0.0,
            })
        return phases
    raise SimulationError(f"unknown action kind {kind!r}")


def _detection_rng(seed: int, anomaly_idx: int, platform_id: str, action_idx: int):
    # string-keyed so draw order never matters
    return random.Random(f"{seed}|{anomaly_idx}|{platform_id}|{action_idx}")


def simulate(plan: Plan, grid: GridModel, scenario: Scenario) -> SimResult:
    """Fly the plan under the scenario and return traces, findings, and rule
    violations. Raises DigestMismatchError if the plan was built for another
    grid."""
    from .report import plan_digest as _plan_digest

    gd = grid_digest(grid)
    if plan.grid_digest != gd:
        raise DigestMismatchError(
            f"plan was built for grid {plan.grid_digest[:12]} but this grid is {gd[:12]}")

    platform_by_id = {p.id: p for p in plan.fleet}
    anomalies_by_span: dict[str, list[tuple[int, Anomaly]]] = {}
    for ai, anomaly in enumerate(scenario.anomalies):
        if anomaly.span_id not in {s.id for s in grid.spans}:
            raise SchemaError(f"anomaly {anomaly.id}: unknown span {anomaly.span_id!r}")
        anomalies_by_span.setdefault(anomaly.span_id, []).append((ai, anomaly))

    traces: list[PlatformTrace] = []
    findings: list[Finding] = []
    for route in plan.routes:
        platform = platform_by_id.get(route.platform_id)
        if platform is None:
            raise SimulationError(f"plan references unknown platform {route.platform_id!r}")
        trace = PlatformTrace(platform_id=platform.id)
        level = platform.battery_capacity_wh
        t = 0.0
        trace.t.append(0.0)
        trace.x.append(grid.gcs_position[0])
        trace.y.append(grid.gcs_position[1])
        trace.z.append(grid.gcs_position[2])
        trace.battery_wh.append(level)
        trace.seg_idx.append(-1)

        for action_idx, action in enumerate(route.actions):
            action_start = t
            for phase in _action_phases(platform, action, level, grid, scenario.wind):
                dur = phase["duration"]
                if dur <= 0:
                    continue
                seg = Segment(
                    action_idx=action_idx, kind=action.kind, mode=phase["mode"],
                    wing_config=phase["wing_config"], airspeed=phase["airspeed"],
                    ground_speed=phase["ground_speed"], power_w=phase["power_w"],
                    t_start=t, t_end=t + dur, station_id=phase.get("station_id"),
                )
                trace.segments.append(seg)
                si = len(trace.segments) - 1
                n = max(1, math.ceil(dur / scenario.dt - 1e-9))
                for k in range(1, n + 1):
                    step_t = min(k * scenario.dt, dur)
                    sample_t = t + step_t
                    f = step_t / dur
                    p = _lerp(phase["p0"], phase["p1"], f)
                    lv = level - phase["power_w"] * step_t / 3600.0
                    trace.t.append(sample_t)
                    trace.x.append(p[0])
                    trace.y.append(p[1])
                    trace.z.append(p[2])
                    trace.battery_wh.append(lv)
                    trace.seg_idx.append(si)
                energy = phase["power_w"] * dur / 3600.0
                level -= energy
                if energy > 0:
                    trace.energy_used_wh += energy
                else:
                    trace.energy_charged_wh -= energy
                if phase["mode"] != "perched":
                    trace.flight_time += dur
                trace.distance += math.dist(phase["p0"], phase["p1"])
                t += dur
            if action.kind == A_CHARGE:
                trace.charge_stops += 1
            if action.kind == A_INSPECT:
                trace.last_inspect_end = t
                duration = t - action_start
                for ai, anomaly in anomalies_by_span.get(action.span_id, ()):
                    frac = (anomaly.offset_fraction if action.direction == "ab"
                            else 1.0 - anomaly.offset_fraction)
                    rng = _detection_rng(scenario.seed, ai, platform.id, action_idx)
                    noise = rng.gauss(0.0, 0.005)
                    findings.append(Finding(
                        anomaly_id=anomaly.id, kind=anomaly.kind, span_id=anomaly.span_id,
                        platform_id=platform.id, t=action_start + frac * duration,
                        offset_measured=min(1.0, max(0.0, anomaly.offset_fraction + noise)),
                        confidence=rng.uniform(0.8, 0.99),
                    ))
        trace.final_battery_wh = level
        trace.end_time = t
        traces.append(trace)

    findings.sort(key=lambda f: (f.t, f.anomaly_id, f.platform_id))
    result = SimResult(
        grid_digest=gd,
        plan_digest=_plan_digest(plan),
        scenario=scenario,
        traces=traces,
        findings=findings,
        violations=[],
        measured_makespan=max((tr.last_inspect_end for tr in traces), default=0.0),
        mission_duration=max((tr.end_time for tr in traces), default=0.0),
    )
    result.violations = check_constraints(result, grid, plan.fleet)
    return result


# ---------------------------------------------------------------------------
# Rule checking


def _episodes(trace: PlatformTrace, flags: list[bool], amounts: list[float],
              rule: str, detail_fn) -> list[Violation]:
    """Coalesce consecutive flagged samples into one violation episode each."""
    out = []
    i = 0
    n = len(flags)
    while i < n:
        if not flags[i]:
            i += 1
            continue
        j = i
        worst = amounts[i]
        at = i
        while j + 1 < n and flags[j + 1]:
            j += 1
            if amounts[j] > worst:
                worst = amounts[j]
                at = j
        out.append(Violation(
            platform_id=trace.platform_id, rule=rule,
            t_start=trace.t[i], t_end=trace.t[j], worst=worst, detail=detail_fn(at, worst),
        ))
        i = j + 1
    return out


def check_constraints(result: SimResult, grid: GridModel,
                      fleet: list[PlatformSpec]) -> list[Violation]:
    """Scan traces for rule breaches. Contiguous breaches of one rule by one
    vehicle merge into a single violation episode.

    Rules: altitude ceiling above ground, control-station radio range,
    in-flight battery reserve, wing-borne flight below stall, operating in
    wind beyond the platform limit, and leaving the mapped terrain.
    """
    by_id = {p.id: p for p in fleet}
    violations: list[Violation] = []
    wind_mag = math.hypot(*result.scenario.wind)

    for trace in result.traces:
        platform = by_id.get(trace.platform_id)
        if platform is None:
            raise SimulationError(f"result references unknown platform {trace.platform_id!r}")
        if not trace.segments:
            continue
        n = len(trace.t)
        in_flight = [False] * n
        for k in range(n):
            si = trace.seg_idx[k]
            in_flight[k] = si >= 0 and trace.segments[si].mode != "perched"

        # ceiling + raster extent
        agl_flags = [False] * n
        agl_amt = [0.0] * n
        raster_flags = [False] * n
        raster_amt = [0.0] * n
        for k in range(n):
            if not in_flight[k]:
                continue
            x, y = trace.x[k], trace.y[k]
            if not grid.terrain.contains(x, y):
                raster_flags[k] = True
                raster_amt[k] = 1.0
                continue
            agl = trace.z[k] - grid.terrain.elevation_at(x, y)
            if agl > MAX_AGL_M + 1e-6:
                agl_flags[k] = True
                agl_amt[k] = agl
        violations.extend(_episodes(
            trace, agl_flags, agl_amt, "agl",
            lambda at, worst: (f"{worst:.1f} m above ground at "
                               f"({trace.x[at]:.0f}, {trace.y[at]:.0f}), limit {MAX_AGL_M:.0f} m"),
        ))
        violations.extend(_episodes(
            trace, raster_flags, raster_amt, "out_of_raster",
            lambda at, worst: (f"left mapped terrain at ({trace.x[at]:.0f}, {trace.y[at]:.0f})"),
        ))

        # radio range
        gcs = grid.gcs_position
        rng_flags = [False] * n
        rng_amt = [0.0] * n
        for k in range(n):
            if not in_flight[k]:
                continue
            d = math.hypot(trace.x[k] - gcs[0], trace.y[k] - gcs[1])
            if d > platform.range_limit + 1e-6:
                rng_flags[k] = True
                rng_amt[k] = d
        violations.extend(_episodes(
            trace, rng_flags, rng_amt, "gcs_range",
            lambda at, worst: (f"{worst:.0f} m from the control station, "
                               f"limit {platform.range_limit:.0f} m"),
        ))

        # battery reserve while airborne
        reserve = platform.reserve_wh
        bat_flags = [False] * n
        bat_amt = [0.0] * n
        for k in range(n):
            if in_flight[k] and trace.battery_wh[k] < reserve - 1e-6:
                bat_flags[k] = True
                bat_amt[k] = reserve - trace.battery_wh[k]
        violations.extend(_episodes(
            trace, bat_flags, bat_amt, "battery_reserve",
            lambda at, worst: (f"battery {worst:.2f} Wh under the "
                               f"{reserve:.1f} Wh reserve in flight"),
        ))

        # stall: per segment, constant condition
        for seg in trace.segments:
            if seg.mode != MODE_FORWARD_WING:
                continue
            v_min = stall_speed(platform, seg.wing_config)
            if seg.airspeed < v_min - 1e-9:
                violations.append(Violation(
                    platform_id=platform.id, rule="stall",
                    t_start=seg.t_start, t_end=seg.t_end, worst=v_min - seg.airspeed,
                    detail=(f"wing-borne at {seg.airspeed:.2f} m/s, below the "
                            f"{seg.wing_config} stall speed {v_min:.2f} m/s"),
                ))

        # wind envelope: one episode per flying platform
        if wind_mag > platform.max_wind + 1e-6:
            violations.append(Violation(
                platform_id=platform.id, rule="wind_limit",
                t_start=0.0, t_end=trace.end_time, worst=wind_mag - platform.max_wind,
                detail=(f"flew in {wind_mag:.1f} m/s wind, platform limit "
                        f"{platform.max_wind:.1f} m/s"),
            ))

    violations.sort(key=lambda v: (v.t_start, v.platform_id, v.rule))
    return violations


# ---------------------------------------------------------------------------
# Result serialization


def result_to_dict(result: SimResult) -> dict:
    return {
        "format_version": serialize.FORMAT_VERSION,
        "grid_digest": result.grid_digest,
        "plan_digest": result.plan_digest,
        "scenario": scenario_to_dict(result.scenario),
        "measured_makespan": result.measured_makespan,
        "mission_duration": result.mission_duration,
        "findings": [
            {"anomaly_id": f.anomaly_id, "kind": f.kind, "span_id": f.span_id,
             "platform_id": f.platform_id, "t": f.t,
             "offset_measured": f.offset_measured, "confidence": f.confidence}
            for f in result.findings
        ],
        "violations": [
            {"platform_id": v.platform_id, "rule": v.rule, "t_start": v.t_start,
             "t_end": v.t_end, "worst": v.worst, "detail": v.detail}
            for v in result.violations
        ],
        "traces": [
            {
                "platform_id": tr.platform_id,
                "t": tr.t, "x": tr.x, "y": tr.y, "z": tr.z,
                "battery_wh": tr.battery_wh, "seg_idx": tr.seg_idx,
                "segments": [
                    {"action_idx": s.action_idx, "kind": s.kind, "mode": s.mode,
                     "wing_config": s.wing_config, "airspeed": s.airspeed,
                     "ground_speed": s.ground_speed, "power_w": s.power_w,
                     "t_start": s.t_start, "t_end": s.t_end, "station_id": s.station_id}
                    for s in tr.segments
                ],
                "distance": tr.distance,
                "flight_time": tr.flight_time,
                "energy_used_wh": tr.energy_used_wh,
                "energy_charged_wh": tr.energy_charged_wh,
                "final_battery_wh": tr.final_battery_wh,
                "charge_stops": tr.charge_stops,
                "last_inspect_end": tr.last_inspect_end,
                "end_time": tr.end_time,
            }
            for tr in result.traces
        ],
    }


def result_from_dict(data: dict, ctx: str = "result") -> SimResult:
    serialize.require_keys(
        data,
        required=("format_version", "grid_digest", "plan_digest", "scenario",
                  "measured_makespan", "mission_duration", "findings", "violations",
                  "traces"),
        optional=(),
        ctx=ctx,
    )
    serialize.check_version(data, ctx)
    traces = []
    for i, td in enumerate(data["traces"]):
        tctx = f"{ctx}.traces[{i}]"
        segments = [
            Segment(action_idx=sd["action_idx"], kind=sd["kind"], mode=sd["mode"],
                    wing_config=sd["wing_config"], airspeed=sd["airspeed"],
                    ground_speed=sd["ground_speed"], power_w=sd["power_w"],
                    t_start=sd["t_start"], t_end=sd["t_end"],
                    station_id=sd.get("station_id"))
            for sd in td["segments"]
        ]
        lengths = {len(td[k]) for k in ("t", "x", "y", "z", "battery_wh", "seg_idx")}
        if len(lengths) != 1:
            raise SchemaError(f"{tctx}: trace arrays have mismatched lengths")
        traces.append(PlatformTrace(
            platform_id=serialize.get_string(td, "platform_id", tctx),
            t=list(td["t"]), x=list(td["x"]), y=list(td["y"]), z=list(td["z"]),
            battery_wh=list(td["battery_wh"]), seg_idx=list(td["seg_idx"]),
            segments=segments,
            distance=td["distance"], flight_time=td["flight_time"],
            energy_used_wh=td["energy_used_wh"],
            energy_charged_wh=td["energy_charged_wh"],
            final_battery_wh=td["final_battery_wh"],
            charge_stops=td["charge_stops"],
            last_inspect_end=td["last_inspect_end"], end_time=td["end_time"],
        ))
    findings = [
        Finding(anomaly_id=fd["anomaly_id"], kind=fd["kind"], span_id=fd["span_id"],
                platform_id=fd["platform_id"], t=fd["t"],
                offset_measured=fd["offset_measured"], confidence=fd["confidence"])
        for fd in data["findings"]
    ]
    violations = [
        Violation(platform_id=vd["platform_id"], rule=vd["rule"], t_start=vd["t_start"],
                  t_end=vd["t_end"], worst=vd["worst"], detail=vd["detail"])
        for vd in data["violations"]
    ]
    return SimResult(
        grid_digest=data["grid_digest"],
        plan_digest=data["plan_digest"],
        scenario=scenario_from_dict(data["scenario"], f"{ctx}.scenario"),
        traces=traces, findings=findings, violations=violations,
        measured_makespan=serialize.get_number(data, "measured_makespan", ctx),
        mission_duration=serialize.get_number(data, "mission_duration", ctx),
    )


def write_result(result: SimResult, path: str | Path) -> None:
    serialize.dump_path(result_to_dict(result), path)


def load_result(path: str | Path) -> SimResult:
    return result_from_dict(serialize.load_path(path), ctx=str(path))


def result_digest(result: SimResult) -> str:
    return serialize.digest(result_to_dict(result))
