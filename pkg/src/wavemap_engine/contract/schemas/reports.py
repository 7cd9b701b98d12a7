"""スキーマ定義：シミュレーション・検証の出力レコード.

Notes:
    - IntegralReport: 共形因子積分 Φ と f の積分
    - EnergyReport: 時間スライスごとのエネルギー・制約残差・上界判定（series.csv の 1 行）
    - GronwallVerdict: Grönwall 上界チェックの判定
    - CheckResult: 恒等式検証バッテリーの 1 チェック
    - RunSummary: summary.json

Policy:
    - Pydantic v2（frozen, extra="forbid"）で検証とシリアル化を行う
    - 数値は float（NaN/inf は生成側で除外）
"""

from __future__ import annotations

from enum import Enum
from typing import Annotated

from pydantic import BaseModel, ConfigDict, Field, model_validator

NonNegativeFloat = Annotated[float, Field(ge=0.0)]


class IntegralReport(BaseModel):
    """Φ = ∫₀^T(s⁻¹+f) と関連積分."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    T: float
    phi: float
    s_inverse_integral: float
    f_integral: float
    f_closed_form: float | None = Field(default=None, description="s(0)^{2-n} - s(T)^{2-n} for n > 2")
    integrable: bool = Field(description="Whether s^-1 is integrable on [0, inf)")
    warning: bool = Field(description="Set when the scenario lies outside the small-data hypotheses (s⁻¹ not integrable)")


class EnergyReport(BaseModel):
    """時間スライス 1 つ分のエネルギー記録.

    Policy:
        - エネルギーはすべて非負（スピノルは e₀ による正定値積を使う）
        - F_total = F_map + F_spin を構築時に検査する
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    t: float
    E_map: tuple[NonNegativeFloat, ...]
    E_spin: tuple[NonNegativeFloat, ...]
    psi_l2: NonNegativeFloat
    F_map: NonNegativeFloat
    F_spin: NonNegativeFloat
    F_total: NonNegativeFloat
    dirac_res: NonNegativeFloat
    bound_value: float | None = None
    bound_ok: bool | None = None

    @model_validator(mode="after")
    def _check_sum(self) -> "EnergyReport":
        if self.F_total != self.F_map + self.F_spin:
            raise ValueError("F_total must equal F_map + F_spin")
        return self


class VerdictStatus(str, Enum):
    """Grönwall 判定の種別."""

    PASS = "pass"
    FAIL = "fail"
    OUTSIDE_HYPOTHESES = "outside_hypotheses"


class GronwallVerdict(BaseModel):
    """Grönwall 上界チェックの結果.

    Notes:
        - passed は仮定内のときのみ True/False、仮定外（s⁻¹ 非可積分）では None
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    status: VerdictStatus
    passed: bool | None
    c_hat: NonNegativeFloat
    max_ratio: float
    ratio_limit: float
    fit_until: float
    F0: NonNegativeFloat
    phi_final: float
    threshold: float | None = Field(default=None, description="(2 Phi_inf)^-1 when Phi_inf is finite")
    threshold_ok: bool | None = None
    bound_values: tuple[float, ...] = ()
    bound_ok: tuple[bool, ...] = ()


class CheckResult(BaseModel):
    """恒等式検証の 1 結果."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    check_id: str
    residual: NonNegativeFloat
    slope: float | None = Field(default=None, description="Observed convergence order under refinement")
    tolerance: float
    passed: bool
    detail: str = ""


class RunStatus(str, Enum):
    """run の終了状態."""

    COMPLETED = "completed"
    ABORTED = "aborted"


class RunSummary(BaseModel):
    """summary.json の内容."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    scenario: str
    status: RunStatus
    exit_code: int
    t_final: float
    last_good_time: float
    steps: int
    rows: int
    gronwall: GronwallVerdict | None = None
    phi_total: float
    phi_integrable: bool
    max_chart_radius: float
    wallclock_s: float
    abort_reason: str | None = None
