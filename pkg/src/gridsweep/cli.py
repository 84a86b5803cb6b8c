"""Command line pipeline: plan, simulate, verify, oracle, report.

Exit codes: 0 success, 1 domain failure (bad inputs, infeasible mission,
violations found by verify), 2 usage errors. Set GRIDSWEEP_LOG to debug,
info, warning, or error to control stderr logging.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import __version__
from .errors import GridsweepError
from .energy import load_fleet
from .grid import load_grid
from .oracle import exact_plan
from .planner import PlannerConfig, construct_plan, make_plan
from .report import build_report, plan_digest, read_plan, write_mission_report, write_plan
from .simulator import load_result, load_scenario, simulate, write_result
from . import serialize

log = logging.getLogger("gridsweep")


def _setup_logging() -> None:
    level_name = os.environ.get("GRIDSWEEP_LOG", "info").lower()
    levels = {"debug": logging.DEBUG, "info": logging.INFO,
              "warning": logging.WARNING, "error": logging.ERROR}
    if level_name not in levels:
        print(f"gridsweep: unknown GRIDSWEEP_LOG level {level_name!r}, using info",
              file=sys.stderr)
        level_name = "info"
    logging.basicConfig(stream=sys.stderr, level=levels[level_name],
                        format="%(levelname)s %(name)s: %(message)s")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridsweep",
        description="Plan, simulate, and report multi-UAV power line inspections.",
    )
    parser.add_argument("--version", action="version", version=f"gridsweep {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="build a minimum-makespan inspection plan")
    p.add_argument("--grid", required=True, help="grid JSON file")
    p.add_argument("--fleet", required=True, help="fleet JSON file")
    p.add_argument("--out", required=True, help="where to write the plan JSON")
    p.add_argument("--seed", type=int, default=0, help="seed recorded in the plan")
    p.add_argument("--budget", type=int, default=400,
                   help="max accepted local-search moves (default 400)")
    p.add_argument("--wall-ms", type=float, default=None,
                   help="optional wall-clock cap for the local search; "
                        "makes planning machine-dependent")
    p.add_argument("--no-improve", action="store_true",
                   help="skip local search, keep the greedy construction")

    p = sub.add_parser("simulate", help="fly a plan under a scenario")
    p.add_argument("--plan", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True, help="where to write the result JSON")

    p = sub.add_parser("verify", help="re-check a result's rule violations")
    p.add_argument("--result", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--plan", required=True)

    p = sub.add_parser("oracle", help="exhaustive optimum for small instances")
    p.add_argument("--grid", required=True)
    p.add_argument("--fleet", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="write the mission report, CSVs, and figures")
    p.add_argument("--plan", required=True)
    p.add_argument("--result", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--out", required=True, help="report JSON path; companions "
                   "are written next to it")
    return parser


def _cmd_plan(args) -> int:
    grid = load_grid(args.grid)
    fleet = load_fleet(args.fleet)
    config = PlannerConfig(improvement_budget=args.budget, wall_ms=args.wall_ms)
    log.info("planning %d tasks for %d platforms", len(grid.spans), len(fleet))
    if args.no_improve:
        plan = construct_plan(grid, fleet, config=config, seed=args.seed)
    else:
        plan = make_plan(grid, fleet, config, seed=args.seed)
    write_plan(plan, args.out)
    print(f"plan {plan_digest(plan)[:12]}: makespan {plan.makespan:.1f} s, "
          f"mission {plan.mission_duration:.1f} s, "
          f"{plan.improvement_moves} improvement moves -> {args.out}")
    return 0


def _cmd_simulate(args) -> int:
    grid = load_grid(args.grid)
    plan = read_plan(args.plan)
    scenario = load_scenario(args.scenario)
    result = simulate(plan, grid, scenario)
    write_result(result, args.out)
    print(f"simulated {scenario.id}: measured makespan {result.measured_makespan:.1f} s, "
          f"{len(result.findings)} findings, {len(result.violations)} violations "
          f"-> {args.out}")
    return 0


def _cmd_verify(args) -> int:
    from .simulator import check_constraints

    grid = load_grid(args.grid)
    plan = read_plan(args.plan)
    result = load_result(args.result)
    pd = plan_digest(plan)
    if result.plan_digest != pd:
        raise GridsweepError(
            f"result was produced from plan {result.plan_digest[:12]}, "
            f"not this plan ({pd[:12]})")
    violations = check_constraints(result, grid, plan.fleet)
    for v in violations:
        print(f"violation {v.rule} {v.platform_id} "
              f"t={v.t_start:.1f}..{v.t_end:.1f}: {v.detail}")
    print(f"{len(violations)} violations")
    return 1 if violations else 0


def _cmd_oracle(args) -> int:
    grid = load_grid(args.grid)
    fleet = load_fleet(args.fleet)
    plan = exact_plan(grid, fleet)
    write_plan(plan, args.out)
    print(f"exhaustive optimum: makespan {plan.makespan:.1f} s -> {args.out}")
    return 0


def _cmd_report(args) -> int:
    grid = load_grid(args.grid)
    plan = read_plan(args.plan)
    result = load_result(args.result)
    paths = write_mission_report(plan, result, grid, args.out)
    report = build_report(plan, result, grid)
    print(f"mission {report['mission_id']}: {report['finding_count']} findings, "
          f"{report['violation_count']} violations")
    for path in paths:
        print(f"wrote {path}")
    return 0


_COMMANDS = {
    "plan": _cmd_plan,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
    "oracle": _cmd_oracle,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    _setup_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except GridsweepError as exc:
        log.error("%s", exc)
        print(f"gridsweep {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
