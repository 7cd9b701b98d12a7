"""スキーマ定義：シナリオ設定（ScenarioConfig）の契約データ構造.

Notes:
    - 設定ファイルの各セクション（scenario, geometry, s, a, lapse, target, grid, run, init,
      gronwall, output）を 1 モデルずつ定義する
    - 値の範囲検証はここで完結させる（resolver は合成と例外変換のみ）

Policy:
    - Pydantic v2（extra="forbid", frozen=True）で未知キーを拒否する
    - 検証メッセージは "grid.npts must be even" のようにドット区切りのキー名を含める
"""

from __future__ import annotations

from enum import Enum
from pathlib import Path
from typing import Annotated

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

PositiveFloat = Annotated[float, Field(gt=0.0)]
UnitInterval = Annotated[float, Field(gt=0.0, le=1.0)]


class ProfileFamily(str, Enum):
    """時間プロファイル（s, a）の解析族."""

    CONST = "const"
    EXP = "exp"
    POWER = "power"
    OSC = "osc"


class LapseFamily(str, Enum):
    """ラプス N(t,x) の解析族.

    Notes:
        - CONST: N ≡ scale
        - COS: N = 1 + β cos(x¹)
        - WAVE: N = 1 + β cos(x¹ − ωt)（∂_tN ≠ 0 を含む族）
    """

    CONST = "const"
    COS = "cos"
    WAVE = "wave"


class TargetKind(str, Enum):
    """ターゲット多様体の種類."""

    FLAT = "flat"
    SPHERE = "sphere"
    WARPED_SURFACE = "warped_surface"


class WarpFamily(str, Enum):
    """warped_surface の f(r) 族."""

    SINH = "sinh"
    CUBIC = "cubic"
    SIN = "sin"
    LINEAR = "linear"


class ScenarioSection(BaseModel):
    """シナリオ名."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str = Field(default="default", min_length=1, max_length=128)


class GeometrySection(BaseModel):
    """時空次元."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    n: int = 3

    @field_validator("n")
    @classmethod
    def _check_n(cls, v: int) -> int:
        if v not in (2, 3):
            raise ValueError("geometry.n must be 2 or 3")
        return v


class ProfileSpec(BaseModel):
    """s(t) / a(t) の解析プロファイル.

    Notes:
        - const: scale
        - exp: scale·e^{rate·t}
        - power: scale·(1+t)^p
        - osc: scale·(1 + mu·sin(omega·t))（|mu| < 1）
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    family: ProfileFamily = ProfileFamily.CONST
    scale: PositiveFloat = 1.0
    rate: float = 1.0
    p: float = 2.0
    mu: float = 0.1
    omega: float = 1.0

    @field_validator("mu")
    @classmethod
    def _check_mu(cls, v: float) -> float:
        if not -1.0 < v < 1.0:
            raise ValueError("mu must satisfy |mu| < 1")
        return v


class LapseSpec(BaseModel):
    """ラプス N の解析プロファイル（|β| < 1 で 0 < A ≤ N ≤ B を保証）."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    family: LapseFamily = LapseFamily.CONST
    scale: PositiveFloat = 1.0
    beta: float = 0.2
    omega: float = 1.0

    @field_validator("beta")
    @classmethod
    def _check_beta(cls, v: float) -> float:
        if not -1.0 < v < 1.0:
            raise ValueError("lapse.beta must satisfy |beta| < 1")
        return v


class TargetSection(BaseModel):
    """ターゲットチャート."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: TargetKind = TargetKind.SPHERE
    dim: int = 2
    f: WarpFamily = WarpFamily.CUBIC
    f_coeff: float = 1.0
    chart_radius: PositiveFloat = 10.0
    base: tuple[float, ...] | None = Field(default=None, description="Base point y0 of the small-data run")

    @model_validator(mode="after")
    def _check_dims(self) -> "TargetSection":
        if self.dim not in (2, 3):
            raise ValueError("target.dim must be 2 or 3")
        if self.kind is TargetKind.WARPED_SURFACE and self.dim != 2:
            raise ValueError("target.dim must be 2 for warped_surface")
        if self.base is not None and len(self.base) != self.dim:
            raise ValueError("target.base must have target.dim entries")
        return self


class GridSection(BaseModel):
    """周期一様格子."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    npts: int = 64
    fd_order: int = 4

    @field_validator("npts")
    @classmethod
    def _check_npts(cls, v: int) -> int:
        if v % 2 != 0:
            raise ValueError("grid.npts must be even")
        if v < 8:
            raise ValueError("grid.npts must be >= 8")
        return v

    @field_validator("fd_order")
    @classmethod
    def _check_order(cls, v: int) -> int:
        if v not in (2, 4):
            raise ValueError("grid.fd_order must be 2 or 4")
        return v


class RunSection(BaseModel):
    """時間積分."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    t_end: PositiveFloat = 10.0
    cfl: Annotated[float, Field(gt=0.0, le=1.0)] = 0.4
    dt_max: PositiveFloat = 0.05


class InitSection(BaseModel):
    """初期データ."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    epsilon: PositiveFloat = 1e-2
    seed: Annotated[int, Field(ge=0)] = 0
    mode_cutoff: Annotated[int, Field(ge=1)] = 3
    spinor: bool = True


class GronwallSection(BaseModel):
    """Grönwall 上界チェック."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    fit_fraction: UnitInterval = 0.1
    ratio_limit: Annotated[float, Field(ge=1.0)] = 2.0


class OutputSection(BaseModel):
    """成果物の出力先."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    path: Path = Path("runs/default")
    stride: Annotated[int, Field(ge=1)] = 10


class ScenarioConfig(BaseModel):
    """シナリオ設定全体（設定ファイル 1 つに対応）."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    scenario: ScenarioSection = ScenarioSection()
    geometry: GeometrySection = GeometrySection()
    s: ProfileSpec = ProfileSpec(family=ProfileFamily.EXP, rate=1.0)
    a: ProfileSpec = ProfileSpec()
    lapse: LapseSpec = LapseSpec()
    target: TargetSection = TargetSection()
    grid: GridSection = GridSection()
    run: RunSection = RunSection()
    init: InitSection = InitSection()
    gronwall: GronwallSection = GronwallSection()
    output: OutputSection = OutputSection()

    @model_validator(mode="after")
    def _check_monotone_s(self) -> "ScenarioConfig":
        # s は非減少でなければならない
        if self.s.family is ProfileFamily.OSC:
            raise ValueError("s.family = osc violates monotonicity of s")
        if self.s.family is ProfileFamily.EXP and self.s.rate < 0:
            raise ValueError("s.rate must be >= 0")
        if self.s.family is ProfileFamily.POWER and self.s.p < 0:
            raise ValueError("s.p must be >= 0")
        if self.a.family is ProfileFamily.POWER and self.a.p < 0:
            raise ValueError("a.p must be >= 0")
        return self
