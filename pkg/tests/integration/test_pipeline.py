from __future__ import annotations

import json

import numpy as np
import pandas as pd
import pytest

from wavemap_engine.contract.errors import ChartExitError, ConfigurationError, ProfileDomainError
from wavemap_engine.contract.schemas.reports import CheckResult, RunStatus, VerdictStatus
from wavemap_engine.domain.models import Simulation
from wavemap_engine.domain.rules.report_view import series_columns
from wavemap_engine.pipeline.scenario import (
    SERIES_FILE,
    SUMMARY_FILE,
    exit_code_for,
    load_scenario,
    parse_config,
    run_scenario,
    sweep,
    write_checks,
)

ABORT_LINES = """\
target.kind = flat
target.chart_radius = 0.001
init.epsilon = 10
"""


def test_small_scenario_writes_artifacts(tmp_path, small_scenario):
    outcome = run_scenario(parse_config(small_scenario), output_dir=tmp_path / "out")

    assert outcome.exit_code == 0
    assert outcome.series_path.exists()
    assert outcome.summary_path.exists()

    frame = pd.read_csv(outcome.series_path)
    assert list(frame.columns) == series_columns(1)
    summary = json.loads(outcome.summary_path.read_text(encoding="utf-8"))
    assert summary["status"] == "completed"
    assert summary["steps"] == 5
    assert summary["rows"] == len(frame) == 5 // 2 + 1
    assert summary["t_final"] == pytest.approx(0.5)
    assert summary["gronwall"]["status"] in {"pass", "fail"}
    assert np.all(frame["F_total"] > 0.0)
    assert frame["t"].iloc[0] == 0.0


def test_rerun_is_bit_identical(tmp_path, small_scenario):
    cfg = parse_config(small_scenario)

    first = run_scenario(cfg, output_dir=tmp_path / "a")
    second = run_scenario(cfg, output_dir=tmp_path / "b")

    assert first.series_path.read_bytes() == second.series_path.read_bytes()


def test_scenario_without_spinor_has_zero_spinor_columns(tmp_path, small_scenario):
    outcome = run_scenario(parse_config(small_scenario + "init.spinor = off\n"), output_dir=tmp_path)
    frame = pd.read_csv(outcome.series_path)

    assert np.all(frame["E_spin_0"] == 0.0)
    assert np.all(frame["psi_l2"] == 0.0)
    assert np.all(frame["dirac_res"] == 0.0)


def test_chart_exit_aborts_with_exit_code_two(tmp_path, small_scenario):
    outcome = run_scenario(parse_config(small_scenario + ABORT_LINES), output_dir=tmp_path)

    assert outcome.exit_code == 2
    assert outcome.summary.status is RunStatus.ABORTED
    assert outcome.summary.rows == 0
    assert outcome.summary.phi_total == 0.0
    assert outcome.summary.abort_reason
    assert list(pd.read_csv(outcome.series_path).columns) == series_columns(1)


def test_constant_s_is_reported_outside_hypotheses(tmp_path, small_scenario):
    outcome = run_scenario(parse_config(small_scenario + "s.family = const\n"), output_dir=tmp_path)

    verdict = outcome.summary.gronwall
    assert verdict is not None
    assert verdict.status is VerdictStatus.OUTSIDE_HYPOTHESES
    assert verdict.passed is None
    assert not outcome.summary.phi_integrable
    # s ≡ 1 では Φ(T) = T
    assert outcome.summary.phi_total == pytest.approx(0.5, rel=1e-9)


def test_simulation_views_require_run(small_scenario):
    simulation = Simulation(config=parse_config(small_scenario))

    with pytest.raises(RuntimeError):
        simulation.summary(wallclock_s=0.0)
    with pytest.raises(RuntimeError):
        simulation.scan(view="series")


def test_simulation_scan_views(small_scenario):
    simulation = Simulation(config=parse_config(small_scenario))
    simulation.run()

    assert "F_total" in simulation.scan(view="series")
    assert "c_hat" in simulation.scan(view="verdict")
    assert "small" in simulation.scan(view="summary")
    with pytest.raises(ValueError):
        simulation.scan(view="bogus")  # type: ignore[arg-type]


def test_exit_codes_follow_severity():
    assert exit_code_for(ChartExitError("left chart")) == 2
    assert exit_code_for(ConfigurationError("bad key")) == 1
    assert exit_code_for(ProfileDomainError("s <= 0")) == 1


def test_write_checks_csv_and_json(tmp_path):
    results = [
        CheckResult(check_id="a", residual=1e-12, tolerance=1e-10, passed=True),
        CheckResult(check_id="b", residual=0.5, slope=0.1, tolerance=1e-10, passed=False),
    ]

    write_checks(results, tmp_path / "checks.csv", fmt="csv")
    write_checks(results, tmp_path / "nested" / "checks.json", fmt="json")

    frame = pd.read_csv(tmp_path / "checks.csv")
    assert list(frame["check_id"]) == ["a", "b"]
    records = json.loads((tmp_path / "nested" / "checks.json").read_text(encoding="utf-8"))
    assert [r["passed"] for r in records] == [True, False]


def test_sweep_isolates_scenarios(tmp_path, write_config, small_scenario):
    out = tmp_path / "runs"
    first = write_config(f"output.path = {out}\n", name="one.cfg")
    second = write_config(
        f"output.path = {out}\n", name="two.cfg", base=small_scenario.replace("scenario.name = small", "scenario.name = other")
    )
    broken = write_config("grid.fd_order = 3\n", name="three.cfg")

    items = sweep([first, second, broken], workers=2)

    assert [item.config_path.name for item in items] == ["one.cfg", "two.cfg", "three.cfg"]
    assert [item.exit_code for item in items] == [0, 0, 1]
    assert items[2].summary is None and items[2].error
    assert (out / "small" / SERIES_FILE).exists()
    assert (out / "other" / SUMMARY_FILE).exists()


@pytest.mark.slow
def test_small_data_run_stays_under_gronwall_bound(tmp_path, write_config):
    path = write_config(
        """\
geometry.n = 3
grid.npts = 64
run.t_end = 20
init.epsilon = 0.01
output.stride = 10
""",
        base="scenario.name = gronwall\n",
    )

    outcome = run_scenario(load_scenario(path), output_dir=tmp_path / "out")
    frame = pd.read_csv(outcome.series_path)

    assert outcome.exit_code == 0
    assert outcome.summary.gronwall is not None
    assert outcome.summary.gronwall.passed is True
    assert bool(frame["bound_ok"].all())
    late = frame["F_total"].iloc[-1]
    mid = frame.loc[(frame["t"] - 5.0).abs().idxmin(), "F_total"]
    assert late <= 1.05 * mid
