"""`wavemap` コマンド（typer）.

設計意図:
- 引数の解釈と表示（rich / tabulate）だけを担い、実行制御は pipeline.scenario に任せる。
- 終了コード: 0 正常 / 1 設定不備・検証失敗 / 2 数値破綻による打ち切り。
"""

from __future__ import annotations

import glob
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console

from wavemap_engine.config.settings import RuntimeSettings
from wavemap_engine.contract.errors import WaveMapEngineError
from wavemap_engine.domain.rules.report_view import format_checks_table, format_summary_table
from wavemap_engine.observability import configure_logging
from wavemap_engine.pipeline.scenario import exit_code_for, load_scenario, run_scenario, run_verify, sweep, write_checks

app = typer.Typer(add_completion=False, no_args_is_help=True, help="Dirac-wave map simulator and identity checks.")

_console = Console()
_err = Console(stderr=True)


def _settings() -> RuntimeSettings:
    settings = RuntimeSettings()
    configure_logging(settings.log_level, console=_err)
    return settings


@app.command()
def simulate(
    config: Path = typer.Argument(..., help="Scenario config file (key = value lines or JSON)."),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Override output.path."),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="Do not print the summary table."),
) -> None:
    """1 シナリオを実行し series.csv / summary.json を書き出す."""
    _settings()
    try:
        cfg = load_scenario(config)
        outcome = run_scenario(cfg, output_dir=output)
    except WaveMapEngineError as e:
        _err.print(f"[red]error:[/red] {e}")
        raise typer.Exit(code=exit_code_for(e)) from e

    if not quiet:
        _console.print(format_summary_table(summary=outcome.summary, tablefmt="simple"))
        _console.print(f"artifacts: {outcome.output_dir}")
    raise typer.Exit(code=outcome.exit_code)


@app.command()
def verify(
    seed: int = typer.Option(0, "--seed", min=0, help="Seed of the analytic test families."),
    fmt: str = typer.Option("csv", "--format", help="Output format of --output (csv | json)."),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Write the results to this file."),
) -> None:
    """恒等式検証バッテリーを実行する（全チェック合格で終了コード 0）."""
    if fmt not in ("csv", "json"):
        raise typer.BadParameter("--format must be csv or json", param_hint="--format")
    settings = _settings()
    results = run_verify(seed, workers=settings.worker_cap())

    _console.print(format_checks_table(results=results, tablefmt="simple"))
    if output is not None:
        write_checks(results, output, fmt="json" if fmt == "json" else "csv")
        _console.print(f"results: {output}")

    failed = [r.check_id for r in results if not r.passed]
    if failed:
        _err.print(f"[red]{len(failed)} check(s) failed[/red]: {', '.join(failed)}")
        raise typer.Exit(code=1)


@app.command(name="sweep")
def sweep_command(
    pattern: str = typer.Argument(..., help="Glob of scenario config files."),
) -> None:
    """独立なシナリオ群を並列実行する（終了コードは各シナリオの最大値）."""
    settings = _settings()
    paths = sorted(glob.glob(pattern))
    if not paths:
        _err.print(f"[red]error:[/red] no config matches {pattern}")
        raise typer.Exit(code=1)

    items = sweep(paths, workers=settings.worker_cap())
    for item in items:
        status = item.summary.status.value if item.summary is not None else f"error: {item.error}"
        _console.print(f"{item.config_path}: exit={item.exit_code} {status}")
    raise typer.Exit(code=max(item.exit_code for item in items))


if __name__ == "__main__":
    app()
