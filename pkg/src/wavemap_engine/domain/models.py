"""Domain model: one scenario's evolution, energy series and Grönwall verdict."""

from __future__ import annotations

import logging
from typing import Literal

from wavemap_engine.contract.errors import ContractError, WaveMapEngineError
from wavemap_engine.contract.schemas.reports import EnergyReport, GronwallVerdict, RunStatus, RunSummary
from wavemap_engine.contract.schemas.scenario import ScenarioConfig
from wavemap_engine.domain.rules.dynamics import Integrator, make_initial_data
from wavemap_engine.domain.rules.energy import apply_bounds, gronwall_check, total_energy
from wavemap_engine.domain.rules.fields import FieldState, Grid
from wavemap_engine.domain.rules.geometry import WarpedSpacetime, conformal_factor_integrals, s_inverse_integrable
from wavemap_engine.domain.rules.report_view import format_series_table, format_summary_table, format_verdict_table
from wavemap_engine.domain.rules.target import TargetChart, chart_norm

logger = logging.getLogger(__name__)

ABORT_EXIT_CODE = 2


class Simulation:
    """1 シナリオの状態・エネルギー系列・判定を保持する.

    保持形式:
        series: output.stride ステップごとの EnergyReport（t=0 を含む）
    """

    def __init__(self, *, config: ScenarioConfig) -> None:
        """初期化.

        Args:
            config: 検証済みのシナリオ設定。
        """
        self._config = config
        self._spacetime = WarpedSpacetime.from_config(config)
        self._chart = TargetChart.from_config(config)
        self._grid = Grid.from_config(config)

        self._series: list[EnergyReport] = []
        self._verdict: GronwallVerdict | None = None
        self._state: FieldState | None = None
        self._steps = 0
        self._last_good_time = 0.0
        self._max_chart_radius = 0.0
        self._abort: WaveMapEngineError | None = None

        self._has_run = False

    @property
    def config(self) -> ScenarioConfig:
        return self._config

    @property
    def spacetime(self) -> WarpedSpacetime:
        return self._spacetime

    @property
    def chart(self) -> TargetChart:
        return self._chart

    @property
    def grid(self) -> Grid:
        return self._grid

    @property
    def series(self) -> list[EnergyReport]:
        """記録済みのエネルギー系列（bound 列は run 後に埋まる）."""
        return self._series

    @property
    def verdict(self) -> GronwallVerdict | None:
        return self._verdict

    @property
    def state(self) -> FieldState | None:
        """最後に受理した状態."""
        return self._state

    @property
    def steps(self) -> int:
        return self._steps

    @property
    def last_good_time(self) -> float:
        return self._last_good_time

    @property
    def abort(self) -> WaveMapEngineError | None:
        """異常終了の原因（正常終了なら None）."""
        return self._abort

    @property
    def has_run(self) -> bool:
        return self._has_run

    def run(self) -> list[EnergyReport]:
        """初期データ生成→時間発展→エネルギー記録→Grönwall 判定を行う.

        チャート離脱と NaN は abort として記録し、例外は送出しない。

        Returns:
            bound 列まで埋めたエネルギー系列。

        Raises:
            ProfileDomainError: 背景プロファイルが定義域外になった。
        """
        cfg = self._config
        st, chart, grid = self._spacetime, self._chart, self._grid
        stride = cfg.output.stride

        def monitor(state: FieldState, step: int) -> None:
            self._state = state
            self._steps = step
            self._last_good_time = state.t
            self._max_chart_radius = max(self._max_chart_radius, chart_norm(chart, state.phi))
            if step % stride == 0:
                report = total_energy(state, st, chart, grid)
                self._series.append(report)
                logger.info(
                    "scenario=%s step=%d t=%.4f F_total=%.6e dirac_res=%.3e",
                    cfg.scenario.name,
                    step,
                    state.t,
                    report.F_total,
                    report.dirac_res,
                )

        try:
            initial = make_initial_data(
                st,
                chart,
                grid,
                epsilon=cfg.init.epsilon,
                seed=cfg.init.seed,
                mode_cutoff=cfg.init.mode_cutoff,
                spinor=cfg.init.spinor,
            )
            integrator = Integrator(initial, st, chart, grid, cfl=cfg.run.cfl, dt_max=cfg.run.dt_max)
            integrator.run(cfg.run.t_end, monitor)
        except WaveMapEngineError as e:
            if e.severity != "abort":
                raise
            self._abort = e
            logger.error("scenario=%s aborted: %s last_good_time=%.6g", cfg.scenario.name, e, self._last_good_time)

        if self._series:
            self._verdict = self._judge()
            if self._verdict is not None:
                self._series = apply_bounds(self._series, self._verdict)

        self._has_run = True
        return self._series

    def _judge(self) -> GronwallVerdict | None:
        try:
            return gronwall_check(
                self._series,
                self._spacetime,
                fit_fraction=self._config.gronwall.fit_fraction,
                ratio_limit=self._config.gronwall.ratio_limit,
                horizon=self._config.run.t_end,
            )
        except ContractError as e:
            logger.warning("scenario=%s gronwall check skipped: %s", self._config.scenario.name, e)
            return None

    def summary(self, *, wallclock_s: float) -> RunSummary:
        """summary.json 用の RunSummary を返す.

        Raises:
            RuntimeError: run() 前に呼ばれた。
        """
        if not self._has_run:
            raise RuntimeError("Simulation has not run. Call run() first.")
        aborted = self._abort is not None
        t_final = self._last_good_time
        return RunSummary(
            scenario=self._config.scenario.name,
            status=RunStatus.ABORTED if aborted else RunStatus.COMPLETED,
            exit_code=ABORT_EXIT_CODE if aborted else 0,
            t_final=t_final,
            last_good_time=self._last_good_time,
            steps=self._steps,
            rows=len(self._series),
            gronwall=self._verdict,
            phi_total=conformal_factor_integrals(self._spacetime, t_final).phi,
            phi_integrable=s_inverse_integrable(self._spacetime),
            max_chart_radius=self._max_chart_radius,
            wallclock_s=wallclock_s,
            abort_reason=None if self._abort is None else str(self._abort),
        )

    def scan(
        self,
        *,
        view: Literal["series", "verdict", "summary"],
        last_n: int = 20,
        tablefmt: str = "github",
        wallclock_s: float = 0.0,
    ) -> str:
        """指定した view をテーブル文字列で返す.

        Args:
            view: 表示種別（"series" | "verdict" | "summary"）。
            last_n: series の直近 n 行のみ表示。
            tablefmt: `tabulate` の tablefmt。
            wallclock_s: summary に載せる経過時間。

        Raises:
            RuntimeError: run() 前に呼ばれた。
            ValueError: view が不正、または判定がない状態で verdict を要求した。
        """
        if not self._has_run:
            raise RuntimeError("Simulation has not run. Call run() first.")

        if view == "series":
            return format_series_table(series=self._series, last_n=last_n, tablefmt=tablefmt)

        if view == "verdict":
            if self._verdict is None:
                raise ValueError("No Gronwall verdict is available")
            return format_verdict_table(verdict=self._verdict, tablefmt=tablefmt)

        if view == "summary":
            return format_summary_table(summary=self.summary(wallclock_s=wallclock_s), tablefmt=tablefmt)

        raise ValueError(f"Invalid view: {view}")
