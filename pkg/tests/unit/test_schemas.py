from __future__ import annotations

import pytest
from pydantic import ValidationError

from wavemap_engine.contract.errors import ChartExitError, ContractError, WaveMapEngineError
from wavemap_engine.contract.schemas.reports import EnergyReport, RunStatus, RunSummary
from wavemap_engine.contract.schemas.scenario import ProfileFamily, ScenarioConfig, TargetKind


def test_scenario_defaults():
    cfg = ScenarioConfig()

    assert cfg.geometry.n == 3
    assert cfg.s.family is ProfileFamily.EXP
    assert cfg.target.kind is TargetKind.SPHERE
    assert cfg.run.cfl == 0.4
    assert cfg.grid.fd_order == 4


@pytest.mark.parametrize(
    ("payload", "message"),
    [
        ({"grid": {"npts": 63}}, "grid.npts must be even"),
        ({"grid": {"npts": 6}}, "grid.npts must be >= 8"),
        ({"grid": {"fd_order": 6}}, "grid.fd_order must be 2 or 4"),
        ({"geometry": {"n": 4}}, "geometry.n must be 2 or 3"),
        ({"s": {"family": "osc"}}, "violates monotonicity"),
        ({"s": {"family": "exp", "rate": -1.0}}, "s.rate must be >= 0"),
        ({"a": {"mu": 1.5}}, "mu must satisfy"),
        ({"lapse": {"beta": -1.0}}, "lapse.beta"),
        ({"target": {"kind": "warped_surface", "dim": 3}}, "target.dim must be 2 for warped_surface"),
        ({"target": {"dim": 2, "base": [0.0, 0.0, 0.0]}}, "target.base"),
    ],
)
def test_scenario_validation_messages(payload, message):
    with pytest.raises(ValidationError, match=message):
        ScenarioConfig.model_validate(payload)


def test_scenario_rejects_unknown_keys():
    with pytest.raises(ValidationError):
        ScenarioConfig.model_validate({"run": {"t_end": 1.0, "steps": 10}})


def test_scenario_is_frozen():
    cfg = ScenarioConfig()

    with pytest.raises(ValidationError):
        cfg.run.t_end = 2.0  # type: ignore[misc]


def test_energy_report_checks_total():
    with pytest.raises(ValidationError, match="F_total must equal"):
        EnergyReport(t=0.0, E_map=(0.1,), E_spin=(), psi_l2=0.0, F_map=0.1, F_spin=0.2, F_total=0.1, dirac_res=0.0)


def test_energy_report_rejects_negative_energy():
    with pytest.raises(ValidationError):
        EnergyReport(t=0.0, E_map=(-0.1,), E_spin=(), psi_l2=0.0, F_map=0.0, F_spin=0.0, F_total=0.0, dirac_res=0.0)


def test_run_summary_round_trips_through_json():
    summary = RunSummary(
        scenario="small",
        status=RunStatus.ABORTED,
        exit_code=2,
        t_final=0.0,
        last_good_time=0.0,
        steps=0,
        rows=0,
        phi_total=0.0,
        phi_integrable=True,
        max_chart_radius=0.0,
        wallclock_s=0.1,
        abort_reason="Map left the admissible chart region",
    )

    assert RunSummary.model_validate_json(summary.model_dump_json()) == summary


def test_error_severity_and_context():
    err = ChartExitError("Map left the admissible chart region", context={"t": 0.5})
    enriched = err.with_context(step=3)

    assert isinstance(enriched, ChartExitError)
    assert enriched.severity == "abort"
    assert enriched.context == {"t": 0.5, "step": 3}
    assert err.context == {"t": 0.5}
    assert str(enriched) == "Map left the admissible chart region"
    assert ContractError("x").severity == "fatal"
    assert isinstance(ContractError("x"), WaveMapEngineError)
