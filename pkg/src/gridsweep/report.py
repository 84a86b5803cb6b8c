"""Plan files, mission reports, and their delimited/graphic companions.

Everything written here is canonical JSON (sorted-ish fixed key order, floats
at six significant digits, trailing newline), so re-running a pipeline with
the same inputs reproduces every output byte for byte.
"""

from __future__ import annotations

import csv
import hashlib
from pathlib import Path

from . import serialize
from .energy import PlatformSpec, platform_from_dict, platform_to_dict
from .errors import DigestMismatchError, SchemaError
from .grid import GridModel
from .planner import Plan, Route, action_from_dict, action_to_dict
from .simulator import SimResult, result_digest


def _file_summary(plan: Plan) -> tuple[float, float]:
    # summed over durations as they will appear in the file, so that loading
    # a plan and writing it again reproduces the same summary bytes
    makespan = 0.0
    mission = 0.0
    for route in plan.routes:
        t = 0.0
        last = 0.0
        for a in route.actions:
            t += serialize.quantize(a.duration)
            if a.kind == "inspect":
                last = t
        makespan = max(makespan, last)
        mission = max(mission, t)
    return makespan, mission


def plan_to_dict(plan: Plan) -> dict:
    makespan, mission_duration = _file_summary(plan)
    return {
        "format_version": serialize.FORMAT_VERSION,
        "grid_digest": plan.grid_digest,
        "seed": plan.seed,
        "config": plan.config,
        "improvement_moves": plan.improvement_moves,
        "fleet": [platform_to_dict(p) for p in plan.fleet],
        "routes": [
            {
                "platform_id": r.platform_id,
                "units": [list(u) for u in r.units],
                "actions": [action_to_dict(a) for a in r.actions],
            }
            for r in plan.routes
        ],
        "makespan": makespan,
        "mission_duration": mission_duration,
    }


def plan_digest(plan: Plan) -> str:
    return serialize.digest(plan_to_dict(plan))


def write_plan(plan: Plan, path: str | Path) -> None:
    serialize.dump_path(plan_to_dict(plan), path)


def _unit_from_list(item, ctx: str):
    if not isinstance(item, list) or not item or item[0] not in ("task", "charge"):
        raise SchemaError(f"{ctx}: malformed route unit {item!r}")
    if item[0] == "task":
        if len(item) != 3 or item[2] not in ("ab", "ba"):
            raise SchemaError(f"{ctx}: malformed task unit {item!r}")
        return ("task", item[1], item[2])
    if len(item) != 2:
        raise SchemaError(f"{ctx}: malformed charge unit {item!r}")
    return ("charge", item[1])


def plan_from_dict(data: dict, ctx: str = "plan") -> Plan:
    serialize.require_keys(
        data,
        required=("format_version", "grid_digest", "seed", "config", "improvement_moves",
                  "fleet", "routes", "makespan", "mission_duration"),
        optional=(),
        ctx=ctx,
    )
    serialize.check_version(data, ctx)
    fleet = [platform_from_dict(item, f"{ctx}.fleet[{i}]")
             for i, item in enumerate(data["fleet"])]
    routes = []
    for i, rd in enumerate(data["routes"]):
        rctx = f"{ctx}.routes[{i}]"
        serialize.require_keys(rd, ("platform_id", "units", "actions"), (), rctx)
        routes.append(Route(
            platform_id=serialize.get_string(rd, "platform_id", rctx),
            units=[_unit_from_list(u, f"{rctx}.units[{j}]") for j, u in enumerate(rd["units"])],
            actions=[action_from_dict(a, f"{rctx}.actions[{j}]")
                     for j, a in enumerate(rd["actions"])],
        ))
    plan = Plan(
        routes=routes,
        grid_digest=serialize.get_string(data, "grid_digest", ctx),
        fleet=fleet,
        seed=data["seed"],
        config=data["config"],
        improvement_moves=data["improvement_moves"],
    )
    stored = serialize.get_number(data, "makespan", ctx)
    if stored > 0 and abs(plan.makespan - stored) > 0.005 * max(stored, 1.0):
        raise SchemaError(
            f"{ctx}: stored makespan {stored:.1f} s does not match the route "
            f"actions ({plan.makespan:.1f} s); file was edited inconsistently")
    return plan


def read_plan(path: str | Path) -> Plan:
    return plan_from_dict(serialize.load_path(path), ctx=str(path))


# ---------------------------------------------------------------------------
# Mission report


def build_report(plan: Plan, result: SimResult, grid: GridModel) -> dict:
    """Assemble the mission report dict from a consistent plan/result pair."""
    pd = plan_digest(plan)
    if result.plan_digest != pd:
        raise DigestMismatchError(
            f"result was produced from plan {result.plan_digest[:12]} "
            f"but this plan is {pd[:12]}")
    if result.grid_digest != plan.grid_digest:
        raise DigestMismatchError(
            f"result grid {result.grid_digest[:12]} does not match plan grid "
            f"{plan.grid_digest[:12]}")
    rd = result_digest(result)
    mission_id = hashlib.sha256(
        (plan.grid_digest + pd + rd).encode("ascii")).hexdigest()[:12]

    platforms = []
    for route, trace in zip(plan.routes, result.traces):
        if route.platform_id != trace.platform_id:
            raise DigestMismatchError(
                f"route/trace order mismatch: {route.platform_id} vs {trace.platform_id}")
        platforms.append({
            "platform_id": trace.platform_id,
            "tasks": sum(1 for u in route.units if u[0] == "task"),
            "distance_m": trace.distance,
            "flight_time_s": trace.flight_time,
            "energy_used_wh": trace.energy_used_wh,
            "energy_charged_wh": trace.energy_charged_wh,
            "final_battery_wh": trace.final_battery_wh,
            "charge_stops": trace.charge_stops,
        })

    return {
        "format_version": serialize.FORMAT_VERSION,
        "mission_id": mission_id,
        "grid_digest": plan.grid_digest,
        "plan_digest": pd,
        "result_digest": rd,
        "scenario_id": result.scenario.id,
        "seed": result.scenario.seed,
        "wind": list(result.scenario.wind),
        "planned_makespan": plan.makespan,
        "measured_makespan": result.measured_makespan,
        "mission_duration": result.mission_duration,
        "total_span_length_m": sum(
            a.distance for r in plan.routes for a in r.actions if a.kind == "inspect"),
        "finding_count": len(result.findings),
        "violation_count": len(result.violations),
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
        "platforms": platforms,
    }


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(serialize.quantize(value))
    return str(value)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_mission_report(plan: Plan, result: SimResult, grid: GridModel,
                         out_path: str | Path) -> list[Path]:
    """Write the report JSON plus its delimited and graphic companions.

    Alongside <stem>.json this writes <stem>_findings.csv, <stem>_trace.csv,
    <stem>_routes.png and <stem>_battery.png. Returns all written paths.
    """
    from . import plots

    out_path = Path(out_path)
    report = build_report(plan, result, grid)
    stem = out_path.with_suffix("")
    paths = [out_path]
    serialize.dump_path(report, out_path)

    findings_path = Path(f"{stem}_findings.csv")
    _write_csv(
        findings_path,
        ["t_s", "platform", "anomaly_id", "kind", "span", "offset", "confidence"],
        [[f.t, f.platform_id, f.anomaly_id, f.kind, f.span_id,
          f.offset_measured, f.confidence] for f in result.findings],
    )
    paths.append(findings_path)

    trace_path = Path(f"{stem}_trace.csv")
    rows = []
    for trace in result.traces:
        for k in range(len(trace.t)):
            rows.append([trace.t[k], trace.platform_id, trace.x[k], trace.y[k],
                         trace.z[k], trace.battery_wh[k]])
    _write_csv(trace_path, ["t_s", "platform", "x_m", "y_m", "z_m", "battery_wh"], rows)
    paths.append(trace_path)

    routes_png = Path(f"{stem}_routes.png")
    plots.save_route_map(grid, result, routes_png)
    paths.append(routes_png)

    battery_png = Path(f"{stem}_battery.png")
    plots.save_battery_profiles(plan, result, battery_png)
    paths.append(battery_png)
    return paths
