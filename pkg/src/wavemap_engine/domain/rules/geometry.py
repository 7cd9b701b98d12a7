"""Rules: warped-product spacetime h = −s⁻²dt² + a(t)²δ on ℝ×T^{n−1}.

設計意図:
- 背景時空は解析プロファイル（s, a, N）のみで決まり、すべての量は (t, x) の純関数として評価する。
- プロファイルの微分は族ごとに手書きの厳密式を持つ（数値微分しない）。収束試験で離散化誤差だけを測るため。
- Christoffel 記号と曲率はフル配列 Γ[ρ, μ, ν] = Γ^ρ_{μν} としても返し、einsum で縮約する。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import quad

from wavemap_engine.contract.errors import ContractError, ProfileDomainError
from wavemap_engine.contract.schemas.reports import IntegralReport
from wavemap_engine.contract.schemas.scenario import LapseFamily, LapseSpec, ProfileFamily, ProfileSpec

if TYPE_CHECKING:
    from wavemap_engine.contract.schemas.scenario import ScenarioConfig

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-11


@dataclass(frozen=True, slots=True)
class ProfileJet:
    """プロファイル値と時間微分（0〜2 階）."""

    value: float
    d1: float
    d2: float


def profile_jet(spec: ProfileSpec, t: float) -> ProfileJet:
    """解析プロファイルを時刻 t で評価する.

    Args:
        spec: プロファイル族とパラメータ。
        t: 時刻。

    Returns:
        値・1 階微分・2 階微分。
    """
    c = spec.scale
    match spec.family:
        case ProfileFamily.CONST:
            return ProfileJet(c, 0.0, 0.0)
        case ProfileFamily.EXP:
            v = c * np.exp(spec.rate * t)
            return ProfileJet(float(v), float(spec.rate * v), float(spec.rate**2 * v))
        case ProfileFamily.POWER:
            base = 1.0 + t
            p = spec.p
            return ProfileJet(
                float(c * base**p),
                float(c * p * base ** (p - 1.0)),
                float(c * p * (p - 1.0) * base ** (p - 2.0)),
            )
        case ProfileFamily.OSC:
            w = spec.omega
            return ProfileJet(
                float(c * (1.0 + spec.mu * np.sin(w * t))),
                float(c * spec.mu * w * np.cos(w * t)),
                float(-c * spec.mu * w * w * np.sin(w * t)),
            )
    raise ProfileDomainError(f"Unknown profile family: {spec.family}")


@dataclass(frozen=True, slots=True)
class WarpedSpacetime:
    """(ℝ×T^{n−1}, −s⁻²dt² + a(t)²δ) とラプス N(t,x) の解析的記述.

    共形計量 h は N に依存しない。N は発展方程式の (Ns) 冪の係数としてのみ現れる。
    """

    n: int
    s: ProfileSpec
    a: ProfileSpec
    lapse: LapseSpec

    @classmethod
    def from_config(cls, cfg: "ScenarioConfig") -> "WarpedSpacetime":
        """ScenarioConfig から背景時空を構築する."""
        return cls(n=cfg.geometry.n, s=cfg.s, a=cfg.a, lapse=cfg.lapse)

    @property
    def d(self) -> int:
        """空間次元 n−1."""
        return self.n - 1

    def s_jet(self, t: float) -> ProfileJet:
        """s(t) とその微分（s > 0 を検査）."""
        jet = profile_jet(self.s, t)
        if not jet.value > 0.0:
            raise ProfileDomainError("s(t) must be positive", context={"t": t, "s": jet.value})
        return jet

    def a_jet(self, t: float) -> ProfileJet:
        """a(t) とその微分（a > 0 を検査）."""
        jet = profile_jet(self.a, t)
        if not jet.value > 0.0:
            raise ProfileDomainError("a(t) must be positive", context={"t": t, "a": jet.value})
        return jet


@dataclass(frozen=True, slots=True)
class LapseField:
    """格子上のラプス N と その 1 階微分."""

    value: FloatArray
    dt: FloatArray
    dx1: FloatArray


def lapse_field(st: WarpedSpacetime, t: float, x1: FloatArray) -> LapseField:
    """ラプス N(t,x) を x¹ 座標配列上で評価する."""
    spec = st.lapse
    c = spec.scale
    match spec.family:
        case LapseFamily.CONST:
            value = np.full_like(x1, c, dtype=float)
            zero = np.zeros_like(x1, dtype=float)
            return LapseField(value, zero, zero.copy())
        case LapseFamily.COS:
            value = c * (1.0 + spec.beta * np.cos(x1))
            return LapseField(value, np.zeros_like(value), -c * spec.beta * np.sin(x1))
        case LapseFamily.WAVE:
            phase = x1 - spec.omega * t
            value = c * (1.0 + spec.beta * np.cos(phase))
            return LapseField(value, c * spec.beta * spec.omega * np.sin(phase), -c * spec.beta * np.sin(phase))
    raise ProfileDomainError(f"Unknown lapse family: {spec.family}")


@dataclass(frozen=True, slots=True)
class ChristoffelData:
    """共形計量 h の Christoffel 記号（ブロック表示）.

    Attributes:
        gamma_000: Γ⁰₀₀ = −ṡ/s
        gamma_0ij: Γ⁰ᵢⱼ = ½s²ġᵢⱼ（対称）
        gamma_j_i0: [j, i] 成分 Γʲᵢ₀ = ½gʲᵏġᵢₖ
        gamma_spatial: g_t の空間 Christoffel（平坦トーラスでは恒等的に 0）
    """

    gamma_000: float
    gamma_0ij: FloatArray
    gamma_j_i0: FloatArray
    gamma_spatial: FloatArray

    def as_array(self) -> FloatArray:
        """フル配列 Γ[ρ, μ, ν] = Γ^ρ_{μν} を返す."""
        d = self.gamma_0ij.shape[0]
        n = d + 1
        full = np.zeros((n, n, n))
        full[0, 0, 0] = self.gamma_000
        full[0, 1:, 1:] = self.gamma_0ij
        full[1:, 1:, 0] = self.gamma_j_i0
        full[1:, 0, 1:] = self.gamma_j_i0
        full[1:, 1:, 1:] = self.gamma_spatial
        return full


@dataclass(frozen=True, slots=True)
class CurvatureData:
    """共形計量 h の曲率.

    Attributes:
        riemann: R[ρ, σ, μ, ν] = R^ρ_{σμν}
        ricci: R_{σν} = R^ρ_{σρν}
        scal: スカラー曲率
        ricci_spatial: スライス計量 g_t の Ricci（平坦トーラスでは 0）
    """

    riemann: FloatArray
    ricci: FloatArray
    scal: float
    ricci_spatial: FloatArray


def metric_components(st: WarpedSpacetime, t: float) -> FloatArray:
    """h_{μν} を返す（対角）."""
    s = st.s_jet(t).value
    a = st.a_jet(t).value
    return np.diag([-(s**-2)] + [a * a] * st.d)


def inverse_metric(st: WarpedSpacetime, t: float) -> FloatArray:
    """h^{μν} を返す（対角）."""
    s = st.s_jet(t).value
    a = st.a_jet(t).value
    return np.diag([-(s * s)] + [a**-2] * st.d)


def christoffels(st: WarpedSpacetime, t: float) -> ChristoffelData:
    """Christoffel 記号を厳密な解析微分から評価する.

    Raises:
        ProfileDomainError: s(t) ≤ 0 または a(t) ≤ 0。
    """
    sj = st.s_jet(t)
    aj = st.a_jet(t)
    eye = np.eye(st.d)
    g_dot = 2.0 * aj.value * aj.d1 * eye
    return ChristoffelData(
        gamma_000=-sj.d1 / sj.value,
        gamma_0ij=0.5 * sj.value**2 * g_dot,
        gamma_j_i0=0.5 * g_dot / aj.value**2,
        gamma_spatial=np.zeros((st.d, st.d, st.d)),
    )


def christoffel_time_derivative(st: WarpedSpacetime, t: float) -> FloatArray:
    """∂_tΓ^ρ_{μν} のフル配列（解析式）."""
    sj = st.s_jet(t)
    aj = st.a_jet(t)
    s, sd, sdd = sj.value, sj.d1, sj.d2
    a, ad, add = aj.value, aj.d1, aj.d2
    n = st.n
    eye = np.eye(st.d)
    out = np.zeros((n, n, n))
    out[0, 0, 0] = -(sdd * s - sd * sd) / (s * s)
    out[0, 1:, 1:] = (2.0 * s * sd * a * ad + s * s * (ad * ad + a * add)) * eye
    mixed = (add * a - ad * ad) / (a * a) * eye
    out[1:, 1:, 0] = mixed
    out[1:, 0, 1:] = mixed
    return out


def second_fundamental_form(st: WarpedSpacetime, t: float) -> FloatArray:
    """II = −(s/2)ġ = −s·a·ȧ·δ."""
    sj = st.s_jet(t)
    aj = st.a_jet(t)
    g_dot = 2.0 * aj.value * aj.d1 * np.eye(st.d)
    return -0.5 * sj.value * g_dot


def curvature(st: WarpedSpacetime, t: float, x: FloatArray | None = None) -> CurvatureData:
    """座標 Riemann テンソルとスカラー曲率.

    R^ρ_{σμν} = ∂_μΓ^ρ_{νσ} − ∂_νΓ^ρ_{μσ} + Γ^ρ_{μλ}Γ^λ_{νσ} − Γ^ρ_{νλ}Γ^λ_{μσ}。
    ∂_μ は μ = 0 のみ非零（空間一様）。x は h が x に依存しないため参照しない。
    """
    del x
    gamma = christoffels(st, t).as_array()
    n = st.n
    d_gamma = np.zeros((n, n, n, n))
    d_gamma[0] = christoffel_time_derivative(st, t)

    riemann = (
        np.einsum("mrns->rsmn", d_gamma)
        - np.einsum("nrms->rsmn", d_gamma)
        + np.einsum("rml,lns->rsmn", gamma, gamma)
        - np.einsum("rnl,lms->rsmn", gamma, gamma)
    )
    ricci = np.einsum("rsrn->sn", riemann)
    scal = float(np.einsum("sn,sn->", inverse_metric(st, t), ricci))
    return CurvatureData(riemann=riemann, ricci=ricci, scal=scal, ricci_spatial=np.zeros((st.d, st.d)))


def f_rate(st: WarpedSpacetime, t: float) -> float:
    """f(t) = (n−2)s^{1−n}ṡ."""
    if st.n == 2:
        return 0.0
    with np.errstate(over="ignore"):
        sj = st.s_jet(t)
    if not np.isfinite(sj.value):
        return 0.0
    return (st.n - 2) * (sj.d1 / sj.value) * sj.value ** (2 - st.n)


def expansion_rate(st: WarpedSpacetime, t: float) -> float:
    """Grönwall 指数の被積分関数 s⁻¹ + f."""
    with np.errstate(over="ignore"):
        s = st.s_jet(t).value
    # 無限遠側の求積で s が overflow した点は寄与 0
    if not np.isfinite(s):
        return 0.0
    return 1.0 / s + f_rate(st, t)


def s_inverse_integrable(st: WarpedSpacetime) -> bool:
    """∫₀^∞ s⁻¹dt < ∞ を族ごとに解析的に判定する."""
    match st.s.family:
        case ProfileFamily.EXP:
            return st.s.rate > 0.0
        case ProfileFamily.POWER:
            return st.s.p > 1.0
    return False


def conformal_factor_integrals(st: WarpedSpacetime, T: float) -> IntegralReport:
    """Φ = ∫₀^T(s⁻¹+f)dt と ∫₀^T f dt を適応求積で評価する.

    Args:
        st: 背景時空。
        T: 積分区間の終端（≥ 0、T = 0 では全成分 0）。

    Returns:
        IntegralReport。n > 2 では閉形式 s(0)^{2−n} − s(T)^{2−n} も併記する。
        ∫s⁻¹ が収束しない族では warning を立てる（定理の仮定外だが実行は可能）。
    """
    if not T >= 0.0:
        raise ProfileDomainError("Integration horizon T must be non-negative", context={"T": T})
    s_inv = f_int = 0.0
    if T > 0.0:
        s_inv, _ = quad(lambda t: expansion_rate(st, t) - f_rate(st, t), 0.0, T, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=500)
        f_int, _ = quad(lambda t: f_rate(st, t), 0.0, T, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=500)

    closed: float | None = None
    if st.n > 2:
        closed = st.s_jet(0.0).value ** (2 - st.n) - st.s_jet(T).value ** (2 - st.n)

    integrable = s_inverse_integrable(st)
    if not integrable:
        logger.warning("s^-1 is not integrable on [0, inf): scenario lies outside the small-data hypotheses (T=%g)", T)

    return IntegralReport(
        T=T,
        phi=s_inv + f_int,
        s_inverse_integral=s_inv,
        f_integral=f_int,
        f_closed_form=closed,
        integrable=integrable,
        warning=not integrable,
    )


def phi_cumulative(st: WarpedSpacetime, times: FloatArray) -> FloatArray:
    """単調な標本時刻列での累積 Φ(t) = ∫₀^t (s⁻¹+f).

    積分の下端は常に t = 0（times[0] > 0 なら out[0] = Φ(times[0])）。

    Raises:
        ContractError: 負の時刻、または減少する時刻列。
    """
    times = np.asarray(times, dtype=float)
    if times.size and (times[0] < 0.0 or np.any(np.diff(times) < 0.0)):
        raise ContractError("Sample times must be non-negative and non-decreasing", context={"t0": float(times[0])})
    out = np.zeros_like(times)
    acc = 0.0
    prev = 0.0
    for idx, t in enumerate(times):
        if t > prev:
            piece, _ = quad(lambda u: expansion_rate(st, u), prev, float(t), epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
            acc += piece
            prev = float(t)
        out[idx] = acc
    return out


def smallness_threshold(st: WarpedSpacetime) -> float | None:
    """ブートストラップ閾値 (2Φ_∞)⁻¹（Φ_∞ が有限のときのみ）."""
    if not s_inverse_integrable(st):
        return None
    phi_inf, _ = quad(lambda t: expansion_rate(st, t), 0.0, np.inf, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=500)
    return 1.0 / (2.0 * phi_inf)
