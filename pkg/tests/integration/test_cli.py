from __future__ import annotations

import json

import pytest
from typer.testing import CliRunner

from main import run
from wavemap_engine.cli import main as cli
from wavemap_engine.contract.schemas.reports import CheckResult
from wavemap_engine.pipeline.scenario import SERIES_FILE, SUMMARY_FILE

runner = CliRunner()


@pytest.fixture
def fake_checks(monkeypatch):
    """恒等式バッテリーを固定の結果に差し替える."""

    def _install(*passed: bool) -> None:
        results = [
            CheckResult(check_id=f"check_{i}", residual=1e-13, tolerance=1e-10, passed=ok)
            for i, ok in enumerate(passed)
        ]
        monkeypatch.setattr(cli, "run_verify", lambda seed, workers=1: results)

    return _install


def test_simulate_writes_artifacts(tmp_path, write_config):
    out = tmp_path / "out"

    result = runner.invoke(cli.app, ["simulate", str(write_config()), "--output", str(out), "--quiet"])

    assert result.exit_code == 0, result.output
    assert (out / SERIES_FILE).exists()
    assert json.loads((out / SUMMARY_FILE).read_text(encoding="utf-8"))["status"] == "completed"


def test_simulate_prints_summary(tmp_path, write_config):
    result = runner.invoke(cli.app, ["simulate", str(write_config()), "-o", str(tmp_path / "out")])

    assert result.exit_code == 0
    assert "completed" in result.stdout
    assert "artifacts:" in result.stdout


def test_simulate_rejects_invalid_config(tmp_path, write_config):
    path = write_config("grid.npts = 63\n", base="")

    result = runner.invoke(cli.app, ["simulate", str(path), "-o", str(tmp_path / "out"), "-q"])

    assert result.exit_code == 1
    assert not (tmp_path / "out").exists()


def test_simulate_aborts_with_exit_code_two(tmp_path, write_config):
    path = write_config("target.kind = flat\ntarget.chart_radius = 0.001\ninit.epsilon = 10\n")

    result = runner.invoke(cli.app, ["simulate", str(path), "-o", str(tmp_path / "out"), "-q"])

    assert result.exit_code == 2
    assert (tmp_path / "out" / SUMMARY_FILE).exists()


def test_verify_writes_json(tmp_path, fake_checks):
    fake_checks(True, True)
    out = tmp_path / "checks.json"

    result = runner.invoke(cli.app, ["verify", "--format", "json", "--output", str(out)])

    assert result.exit_code == 0
    assert [r["check_id"] for r in json.loads(out.read_text(encoding="utf-8"))] == ["check_0", "check_1"]


def test_verify_fails_when_any_check_fails(tmp_path, fake_checks):
    fake_checks(True, False)
    out = tmp_path / "checks.csv"

    result = runner.invoke(cli.app, ["verify", "-o", str(out)])

    assert result.exit_code == 1
    assert out.read_text(encoding="utf-8").splitlines()[0].startswith("check_id")


def test_verify_rejects_unknown_format(fake_checks):
    fake_checks(True)

    result = runner.invoke(cli.app, ["verify", "--format", "yaml"])

    assert result.exit_code == 2


def test_sweep_without_matches(tmp_path):
    result = runner.invoke(cli.app, ["sweep", str(tmp_path / "*.cfg")])

    assert result.exit_code == 1


def test_script_entry_returns_exit_code(tmp_path, write_config):
    assert run(["simulate", str(write_config()), "-o", str(tmp_path / "out"), "-q"]) == 0
    assert run(["simulate", str(tmp_path / "missing.cfg"), "-q"]) == 1
