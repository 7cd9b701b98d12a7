"""シナリオ実行パイプライン（simulate / verify / sweep）.

設計意図:
- 設定の読み込み→検証→Simulation 実行→成果物（series.csv, summary.json）書き出しを 1 か所に閉じる。
- 例外→終了コードの変換はここで行う（設定不備 1 / 数値破綻 2）。CLI は表示だけを担う。
- sweep はシナリオごとにプロセスを分け、状態と出力ディレクトリを共有しない。
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import pandas as pd

from wavemap_engine.config.loader import load_config, parse_flat_text
from wavemap_engine.config.resolver import resolve_config
from wavemap_engine.contract.errors import WaveMapEngineError
from wavemap_engine.contract.schemas.reports import CheckResult, RunSummary
from wavemap_engine.contract.schemas.scenario import ScenarioConfig
from wavemap_engine.domain.models import ABORT_EXIT_CODE, Simulation
from wavemap_engine.domain.rules.fields import regularity_index
from wavemap_engine.domain.rules.report_view import series_columns, series_rows
from wavemap_engine.domain.rules.verify import run_battery

logger = logging.getLogger(__name__)

CONFIG_EXIT_CODE = 1
SERIES_FILE = "series.csv"
SUMMARY_FILE = "summary.json"
CSV_FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True, slots=True)
class ScenarioOutcome:
    """1 シナリオ実行の結果."""

    summary: RunSummary
    output_dir: Path

    @property
    def exit_code(self) -> int:
        return self.summary.exit_code

    @property
    def series_path(self) -> Path:
        return self.output_dir / SERIES_FILE

    @property
    def summary_path(self) -> Path:
        return self.output_dir / SUMMARY_FILE


@dataclass(frozen=True, slots=True)
class SweepItem:
    """sweep の 1 要素（設定エラー時は summary なし）."""

    config_path: Path
    exit_code: int
    summary: RunSummary | None = None
    error: str | None = None


def exit_code_for(error: WaveMapEngineError) -> int:
    """例外の severity から終了コードを決める."""
    return ABORT_EXIT_CODE if error.severity == "abort" else CONFIG_EXIT_CODE


def parse_config(text: str) -> ScenarioConfig:
    """フラット key=value テキストを検証済み ScenarioConfig にする.

    Raises:
        ConfigurationError: 構文不正（行番号付き）または値の検証エラー（キー名付き）。
    """
    return resolve_config(parse_flat_text(text))


def load_scenario(path: str | Path) -> ScenarioConfig:
    """設定ファイルを読み込み、検証済み ScenarioConfig を返す."""
    return resolve_config(load_config(path))


def write_series(simulation: Simulation, path: Path) -> None:
    """エネルギー系列を 17 桁精度の CSV に書き出す."""
    columns = series_columns(regularity_index(simulation.spacetime.n))
    frame = pd.DataFrame(series_rows(simulation.series), columns=columns)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


def run_scenario(cfg: ScenarioConfig, *, output_dir: Path | None = None) -> ScenarioOutcome:
    """1 シナリオを実行し series.csv と summary.json を書き出す.

    Args:
        cfg: 検証済み設定。
        output_dir: 出力先（None なら cfg.output.path）。

    Returns:
        ScenarioOutcome。正常終了は exit_code 0、チャート離脱/NaN は 2。

    Raises:
        ProfileDomainError: 背景プロファイルが定義域外になった（呼び出し側で終了コード 1 に変換）。
    """
    out = Path(output_dir) if output_dir is not None else cfg.output.path
    out.mkdir(parents=True, exist_ok=True)

    logger.info("scenario=%s start output=%s", cfg.scenario.name, out)
    started = time.perf_counter()
    simulation = Simulation(config=cfg)
    simulation.run()
    wallclock = time.perf_counter() - started

    write_series(simulation, out / SERIES_FILE)
    summary = simulation.summary(wallclock_s=wallclock)
    (out / SUMMARY_FILE).write_text(summary.model_dump_json(indent=2) + "\n", encoding="utf-8")

    logger.info(
        "scenario=%s status=%s steps=%d rows=%d wallclock=%.2fs",
        cfg.scenario.name,
        summary.status.value,
        summary.steps,
        summary.rows,
        wallclock,
    )
    return ScenarioOutcome(summary=summary, output_dir=out)


def run_verify(seed: int = 0, *, workers: int | None = None) -> list[CheckResult]:
    """恒等式検証バッテリーを実行する."""
    return run_battery(seed, workers=workers)


def write_checks(results: Sequence[CheckResult], path: Path, *, fmt: Literal["csv", "json"]) -> None:
    """検証結果を CSV または JSON で書き出す."""
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        frame = pd.DataFrame([r.model_dump() for r in results])
        frame.to_json(path, orient="records", indent=2, double_precision=15)
        return
    if fmt == "csv":
        frame = pd.DataFrame([r.model_dump() for r in results])
        frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        return
    raise ValueError(f"Invalid format: {fmt}")


def _sweep_one(config_path: str) -> SweepItem:
    path = Path(config_path)
    try:
        cfg = load_scenario(path)
        outcome = run_scenario(cfg, output_dir=cfg.output.path / cfg.scenario.name)
    except WaveMapEngineError as e:
        logger.error("sweep: %s failed: %s", path, e)
        return SweepItem(config_path=path, exit_code=exit_code_for(e), error=str(e))
    return SweepItem(config_path=path, exit_code=outcome.exit_code, summary=outcome.summary)


def sweep(paths: Sequence[str | Path], *, workers: int | None = None) -> list[SweepItem]:
    """独立なシナリオ群をプロセスプールで並列実行する（入力順で返す）.

    Notes:
        - 各シナリオの出力先は output.path / scenario.name
    """
    if not paths:
        return []
    names = [str(p) for p in paths]
    max_workers = min(len(names), workers) if workers is not None else None
    with ProcessPoolExecutor(max_workers=max_workers) as pool:
        items = list(pool.map(_sweep_one, names))
    failed = sum(1 for item in items if item.exit_code != 0)
    logger.info("sweep: %d scenarios, %d non-zero exit", len(items), failed)
    return items
