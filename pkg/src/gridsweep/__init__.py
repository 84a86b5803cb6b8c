"""Multi-UAV power line inspection: planning, simulation, reporting."""

__version__ = "0.1.0"

from .errors import GridsweepError
from .grid import GridModel, load_grid, safe_transit_altitude, span_length, validate_grid, write_grid
from .energy import (
    PlatformSpec,
    charge_duration,
    harvest_power,
    leg_energy,
    load_fleet,
    power_draw,
    resolve_flight,
    stall_speed,
    write_fleet,
)
from .planner import (
    InspectionTask,
    Plan,
    PlannerConfig,
    construct_plan,
    generate_tasks,
    improve_plan,
    make_plan,
    plan_makespan,
    transit_cost,
)
from .oracle import exact_plan
from .simulator import Scenario, SimResult, check_constraints, load_scenario, simulate
from .report import build_report, read_plan, write_mission_report, write_plan

__all__ = [
    "GridsweepError",
    "GridModel",
    "InspectionTask",
    "Plan",
    "PlannerConfig",
    "PlatformSpec",
    "Scenario",
    "SimResult",
    "build_report",
    "charge_duration",
    "check_constraints",
    "construct_plan",
    "exact_plan",
    "generate_tasks",
    "harvest_power",
    "improve_plan",
    "leg_energy",
    "load_fleet",
    "load_grid",
    "load_scenario",
    "make_plan",
    "plan_makespan",
    "power_draw",
    "read_plan",
    "resolve_flight",
    "safe_transit_altitude",
    "simulate",
    "span_length",
    "stall_speed",
    "transit_cost",
    "validate_grid",
    "write_fleet",
    "write_grid",
    "write_mission_report",
    "write_plan",
]
