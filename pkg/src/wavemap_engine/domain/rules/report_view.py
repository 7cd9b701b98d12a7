"""Rules: text tables for energy series, verdicts and identity checks."""

from __future__ import annotations

from typing import Sequence

from tabulate import tabulate

from wavemap_engine.contract.schemas.reports import CheckResult, EnergyReport, GronwallVerdict, RunSummary


def series_columns(r: int) -> list[str]:
    """series.csv の列名（E_map は 0..r、E_spin は 0..r−1）."""
    return (
        ["t"]
        + [f"E_map_{k}" for k in range(r + 1)]
        + [f"E_spin_{k}" for k in range(r)]
        + ["psi_l2", "F_total", "dirac_res", "bound_value", "bound_ok"]
    )


def series_rows(series: Sequence[EnergyReport]) -> list[list[object]]:
    """EnergyReport 列を series_columns の順に並べた行へ変換する."""
    return [
        [row.t, *row.E_map, *row.E_spin, row.psi_l2, row.F_total, row.dirac_res, row.bound_value, row.bound_ok]
        for row in series
    ]


def format_series_table(
    *,
    series: Sequence[EnergyReport],
    last_n: int = 20,
    tablefmt: str = "github",
) -> str:
    """エネルギー系列の直近 last_n 行をテーブル文字列に整形する."""
    if not series:
        return ""
    r = len(series[0].E_map) - 1
    rows = series_rows(series)[-last_n:] if last_n > 0 else series_rows(series)
    return tabulate(rows, headers=series_columns(r), tablefmt=tablefmt, floatfmt=".6e")


def format_verdict_table(*, verdict: GronwallVerdict, tablefmt: str = "github") -> str:
    """Grönwall 判定を縦持ちテーブルに整形する."""
    rows = [
        ["status", verdict.status.value],
        ["passed", verdict.passed],
        ["c_hat", verdict.c_hat],
        ["max_ratio", verdict.max_ratio],
        ["ratio_limit", verdict.ratio_limit],
        ["fit_until", verdict.fit_until],
        ["F0", verdict.F0],
        ["phi_final", verdict.phi_final],
        ["threshold", verdict.threshold],
        ["threshold_ok", verdict.threshold_ok],
    ]
    return tabulate(rows, headers=["field", "value"], tablefmt=tablefmt)


def format_checks_table(*, results: Sequence[CheckResult], tablefmt: str = "github") -> str:
    """検証バッテリーの結果を 1 行 1 チェックで整形する."""
    headers = ["check_id", "residual", "slope", "tolerance", "passed"]
    rows = [
        [r.check_id, f"{r.residual:.3e}", "" if r.slope is None else f"{r.slope:.2f}", f"{r.tolerance:.0e}", r.passed]
        for r in results
    ]
    return tabulate(rows, headers=headers, tablefmt=tablefmt)


def format_summary_table(*, summary: RunSummary, tablefmt: str = "github") -> str:
    """RunSummary の主要項目を整形する."""
    verdict = summary.gronwall
    rows = [
        ["scenario", summary.scenario],
        ["status", summary.status.value],
        ["exit_code", summary.exit_code],
        ["t_final", summary.t_final],
        ["steps", summary.steps],
        ["rows", summary.rows],
        ["gronwall", "-" if verdict is None else verdict.status.value],
        ["c_hat", "-" if verdict is None else verdict.c_hat],
        ["phi_total", summary.phi_total],
        ["max_chart_radius", summary.max_chart_radius],
        ["wallclock_s", round(summary.wallclock_s, 3)],
    ]
    if summary.abort_reason:
        rows.append(["abort_reason", summary.abort_reason])
    return tabulate(rows, headers=["field", "value"], tablefmt=tablefmt)
