import json
from dataclasses import replace

import pytest

from gridsweep.cli import main
from gridsweep.grid import write_grid
from gridsweep.report import write_plan
from gridsweep.simulator import Scenario, simulate, write_result, write_scenario

from conftest import FIXTURES, simple_rotor, single_span_grid
from test_simulator import single_span_plan


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_full_pipeline(tmp_path, capsys):
    grid = str(FIXTURES / "ridge_grid.json")
    plan_path = tmp_path / "plan.json"
    result_path = tmp_path / "result.json"
    report_path = tmp_path / "report.json"

    code, out, _ = run(capsys, "plan", "--grid", grid,
                       "--fleet", str(FIXTURES / "morphing_fleet.json"),
                       "--out", str(plan_path), "--seed", "3")
    assert code == 0 and "makespan" in out and plan_path.exists()

    code, out, _ = run(capsys, "simulate", "--plan", str(plan_path),
                       "--grid", grid,
                       "--scenario", str(FIXTURES / "ridge_scenario.json"),
                       "--out", str(result_path))
    assert code == 0 and "findings" in out and result_path.exists()

    code, out, _ = run(capsys, "verify", "--result", str(result_path),
                       "--grid", grid, "--plan", str(plan_path))
    assert code == 0
    assert "0 violations" in out

    code, out, _ = run(capsys, "report", "--plan", str(plan_path),
                       "--result", str(result_path), "--grid", grid,
                       "--out", str(report_path))
    assert code == 0
    for suffix in ("report.json", "report_findings.csv", "report_trace.csv",
                   "report_routes.png", "report_battery.png"):
        assert (tmp_path / suffix).exists()
    report = json.loads(report_path.read_text())
    assert report["violation_count"] == 0
    assert report["finding_count"] == 2


def test_oracle_subcommand(tmp_path, capsys):
    out_path = tmp_path / "optimum.json"
    code, out, _ = run(capsys, "oracle", "--grid", str(FIXTURES / "ridge_grid.json"),
                       "--fleet", str(FIXTURES / "morphing_fleet.json"),
                       "--out", str(out_path))
    assert code == 0 and "optimum" in out and out_path.exists()


def test_verify_exits_one_on_violations(tmp_path, capsys):
    grid = single_span_grid()
    p = simple_rotor()
    plan = single_span_plan(grid, p)
    plan.fleet[0] = replace(p, range_limit=500.0)
    result = simulate(plan, grid, Scenario(id="hot", dt=0.5, seed=1))
    assert result.violations

    grid_path = tmp_path / "grid.json"
    plan_path = tmp_path / "plan.json"
    result_path = tmp_path / "result.json"
    write_grid(grid, grid_path)
    write_plan(plan, plan_path)
    write_result(result, result_path)

    code, out, _ = run(capsys, "verify", "--result", str(result_path),
                       "--grid", str(grid_path), "--plan", str(plan_path))
    assert code == 1
    assert "gcs_range" in out
    assert "0 violations" not in out


def test_domain_error_exits_one(tmp_path, capsys):
    grid = single_span_grid()
    plan = single_span_plan(grid, simple_rotor())
    plan_path = tmp_path / "plan.json"
    scen_path = tmp_path / "scenario.json"
    write_plan(plan, plan_path)
    write_scenario(Scenario(id="s", dt=0.5, seed=0), scen_path)
    # simulate against a different grid than the plan was built for
    code, out, err = run(capsys, "simulate", "--plan", str(plan_path),
                         "--grid", str(FIXTURES / "ridge_grid.json"),
                         "--scenario", str(scen_path),
                         "--out", str(tmp_path / "result.json"))
    assert code == 1
    assert "gridsweep simulate" in err


def test_missing_arguments_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["plan"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["destroy", "--grid", "x"])
    assert exc.value.code == 2


def test_unknown_log_level_falls_back(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("GRIDSWEEP_LOG", "chatty")
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    captured = capsys.readouterr()
    assert "unknown GRIDSWEEP_LOG" in captured.err
    assert "gridsweep 0.1.0" in captured.out
