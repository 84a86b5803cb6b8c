"""Exhaustive reference planner for small instances.

Enumerates every task-to-vehicle assignment, every visit order, and both
flight directions per span, completing each candidate with the same charge
stop insertion the heuristic uses. Guarded by hard instance-size limits; the
point is trustworthy optima for tests and benchmarks, not scale.
"""

from __future__ import annotations

import itertools

from .energy import PlatformSpec
from .errors import AltitudeError, InfeasibleTaskError, OracleLimitError, PlanningError, WindError
from .grid import GridModel, grid_digest
from .planner import (
    DIRECTIONS,
    InspectionTask,
    Plan,
    Route,
    RouteBuilder,
    generate_tasks,
    task_rejection,
)

MAX_ORACLE_TASKS = 8
MAX_ORACLE_PLATFORMS = 3


def directed_sequences(task_ids: list[str]):
    """All (order, directions) unit sequences over a task set, in canonical
    order. A set of n tasks yields n! * 2^n sequences."""
    for perm in itertools.permutations(sorted(task_ids)):
        for dirs in itertools.product(DIRECTIONS, repeat=len(perm)):
            yield tuple(("task", tid, d) for tid, d in zip(perm, dirs))


def _best_subroute(builder: RouteBuilder, platform: PlatformSpec,
                   task_ids: frozenset, memo: dict, max_charges: int):
    """Cheapest feasible route for one platform over a fixed task set, or
    None. Minimizes (last inspection end, total duration); earliest canonical
    sequence wins ties."""
    key = (platform.id, task_ids)
    if key in memo:
        return memo[key]
    best: tuple | None = None
    for units in directed_sequences(sorted(task_ids)):
        try:
            done, ev = builder.insert_recharge_stops(platform, units, max_charges)
        except (PlanningError, AltitudeError, WindError):
            continue
        score = (ev.last_inspect_end, ev.duration)
        if best is None or score < best[0]:
            best = (score, done, ev)
    memo[key] = best
    return best


def exact_plan(grid: GridModel, fleet: list[PlatformSpec],
               tasks: list[InspectionTask] | None = None,
               max_charges_per_route: int = 50) -> Plan:
    """Minimum-makespan plan by exhaustive enumeration.

    Ties on makespan resolve to the lower total route duration, then to the
    canonically first assignment, so repeated runs agree byte for byte.
    Refuses instances beyond the size guards; runtime is factorial in tasks.
    """
    if tasks is None:
        tasks = generate_tasks(grid)
    if len(tasks) > MAX_ORACLE_TASKS:
        raise OracleLimitError(
            f"{len(tasks)} tasks exceed the exhaustive-search limit of {MAX_ORACLE_TASKS}")
    if len(fleet) > MAX_ORACLE_PLATFORMS:
        raise OracleLimitError(
            f"{len(fleet)} platforms exceed the exhaustive-search limit of {MAX_ORACLE_PLATFORMS}")
    if not fleet:
        raise PlanningError("fleet is empty")

    builder = RouteBuilder(grid, tasks)
    tasks = sorted(tasks, key=lambda t: t.id)
    eligible: list[list[int]] = []
    for task in tasks:
        ok = [pi for pi, p in enumerate(fleet) if task_rejection(p, task, grid) is None]
        if not ok:
            raise InfeasibleTaskError(f"task {task.id} (span {task.span_id}) fits no platform")
        eligible.append(ok)

    memo: dict = {}
    best: tuple | None = None
    for assign in itertools.product(*eligible) if tasks else [()]:
        groups: list[set] = [set() for _ in fleet]
        for task, pi in zip(tasks, assign):
            groups[pi].add(task.id)
        subroutes = []
        feasible = True
        for pi, platform in enumerate(fleet):
            sub = _best_subroute(builder, platform, frozenset(groups[pi]), memo,
                                 max_charges_per_route)
            if sub is None:
                feasible = False
                break
            subroutes.append(sub)
        if not feasible:
            continue
        makespan = max(s[0][0] for s in subroutes)
        total = sum(s[0][1] for s in subroutes)
        score = (makespan, total, assign)
        if best is None or score < best[0]:
            best = (score, subroutes)

    if best is None:
        raise PlanningError("no assignment of tasks to platforms is battery-feasible")

    routes = [
        Route(platform_id=fleet[pi].id, units=list(sub[1]), actions=sub[2].actions)
        for pi, sub in enumerate(best[1])
    ]
    return Plan(routes=routes, grid_digest=grid_digest(grid), fleet=list(fleet),
                config={"method": "exhaustive"})
