"""Matplotlib figures for mission reports. Rendering is headless (Agg) and
the PNG metadata is pinned so identical data gives identical bytes."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .grid import GridModel
from .planner import Plan
from .simulator import SimResult

_PNG_META = {"Software": "gridsweep"}
_COLORS = ("tab:blue", "tab:orange", "tab:green", "tab:red", "tab:purple", "tab:brown")


def _save(fig, path: Path) -> None:
    fig.savefig(path, dpi=110, metadata=_PNG_META)
    plt.close(fig)


def save_route_map(grid: GridModel, result: SimResult, path: str | Path) -> None:
    """Top-down view: spans, towers, charge points, control station, and the
    flown ground tracks."""
    fig, ax = plt.subplots(figsize=(7.5, 7.5))
    for span in grid.spans:
        a = grid.tower(span.tower_a).position
        b = grid.tower(span.tower_b).position
        ax.plot([a[0], b[0]], [a[1], b[1]], color="0.55", lw=1.4, zorder=1)
    tx = [t.position[0] for t in grid.towers]
    ty = [t.position[1] for t in grid.towers]
    ax.scatter(tx, ty, s=14, color="0.3", marker="s", zorder=2, label="towers")
    if grid.stations:
        sx, sy = [], []
        for st in grid.stations:
            p = grid.station_point(st)
            sx.append(p[0])
            sy.append(p[1])
        ax.scatter(sx, sy, s=70, color="gold", edgecolor="black", marker="^",
                   zorder=4, label="charge points")
    gx, gy = grid.gcs_position[0], grid.gcs_position[1]
    ax.scatter([gx], [gy], s=110, color="crimson", marker="*", zorder=5,
               label="control station")
    for i, trace in enumerate(result.traces):
        if len(trace.t) < 2:
            continue
        color = _COLORS[i % len(_COLORS)]
        ax.plot(trace.x, trace.y, color=color, lw=1.0, alpha=0.85, zorder=3,
                label=trace.platform_id)
    for f in result.findings:
        idx = next((i for i, tr in enumerate(result.traces)
                    if tr.platform_id == f.platform_id), None)
        if idx is None:
            continue
        tr = result.traces[idx]
        # nearest sample to the detection time
        k = min(range(len(tr.t)), key=lambda k: abs(tr.t[k] - f.t))
        ax.scatter([tr.x[k]], [tr.y[k]], s=46, facecolor="none", edgecolor="red",
                   zorder=6)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title(f"mission {result.scenario.id}: flown routes")
    ax.set_aspect("equal")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.25)
    fig.tight_layout()
    _save(fig, Path(path))


def save_battery_profiles(plan: Plan, result: SimResult, path: str | Path) -> None:
    """Battery level over time per vehicle, with each reserve floor dashed."""
    by_id = {p.id: p for p in plan.fleet}
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    for i, trace in enumerate(result.traces):
        if len(trace.t) < 2:
            continue
        color = _COLORS[i % len(_COLORS)]
        ax.plot(trace.t, trace.battery_wh, color=color, lw=1.2, label=trace.platform_id)
        platform = by_id.get(trace.platform_id)
        if platform is not None:
            ax.axhline(platform.reserve_wh, color=color, lw=0.8, ls="--", alpha=0.6)
    if result.measured_makespan > 0:
        ax.axvline(result.measured_makespan, color="0.4", lw=0.8, ls=":",
                   label="last inspection")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("battery (Wh)")
    ax.set_title(f"mission {result.scenario.id}: battery profiles")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.25)
    fig.tight_layout()
    _save(fig, Path(path))
