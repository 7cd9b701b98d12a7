"""Rules: chart-based Riemannian targets (P, G).

設計意図:
- ターゲットは座標チャート y^I で表し、G_IJ, Γ^I_JK, R_IJKL, ∇_J R_KLMN を閉形式で返す。
- すべての関数は先頭軸（格子点など）にブロードキャストする。最後の軸がターゲット添字。
- 曲率の規約は R_IJKL = ⟨R(∂_K,∂_L)∂_J, ∂_I⟩、R^P(X,Y)Z = R^I_JKL X^K Y^L Z^J ∂_I。
  単位球面で R^P(X,Y)Y = X（X ⟂ Y 正規直交）となる。
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from numpy.typing import NDArray

from wavemap_engine.contract.errors import ChartExitError, ContractError
from wavemap_engine.contract.schemas.scenario import TargetKind, WarpFamily

if TYPE_CHECKING:
    from wavemap_engine.contract.schemas.scenario import ScenarioConfig

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]

IMAG_TOLERANCE = 1e-12


@dataclass(frozen=True, slots=True)
class TargetChart:
    """座標チャート付きターゲット多様体.

    Attributes:
        kind: flat / sphere（立体射影）/ warped_surface（dr² + f(r)²dθ²）
        dim: ターゲット次元 m
        warp: warped_surface の f(r) 族
        warp_coeff: cubic 族 f = r + c r³ の係数 c
        chart_radius: 許容チャート半径
        base: 小データ発展の基点 y₀（None なら族ごとの既定値）
    """

    kind: TargetKind = TargetKind.SPHERE
    dim: int = 2
    warp: WarpFamily = WarpFamily.CUBIC
    warp_coeff: float = 1.0
    chart_radius: float = 10.0
    base: tuple[float, ...] | None = None

    @classmethod
    def from_config(cls, cfg: "ScenarioConfig") -> "TargetChart":
        """ScenarioConfig からチャートを構築する."""
        t = cfg.target
        return cls(
            kind=t.kind,
            dim=t.dim,
            warp=t.f,
            warp_coeff=t.f_coeff,
            chart_radius=t.chart_radius,
            base=t.base,
        )

    def base_point(self) -> FloatArray:
        """基点 y₀."""
        if self.base is not None:
            return np.asarray(self.base, dtype=float)
        if self.kind is TargetKind.WARPED_SURFACE:
            return np.array([1.0, 0.0])
        return np.zeros(self.dim)


@dataclass(frozen=True, slots=True)
class TargetGeometry:
    """点ごとのターゲット幾何量（先頭軸は格子）.

    Attributes:
        G: G_IJ
        Ginv: G^IJ
        Gamma: Γ^I_JK（[..., I, J, K]）
        R: R_IJKL（全添字下付き）
        R_up: R^I_JKL
        gradR: ∇_J R_KLMN（[..., J, K, L, M, N]）
    """

    G: FloatArray
    Ginv: FloatArray
    Gamma: FloatArray
    R: FloatArray
    R_up: FloatArray
    gradR: FloatArray


@dataclass(frozen=True, slots=True)
class WarpJet:
    """f(r) と 3 階までの微分."""

    f: FloatArray
    f1: FloatArray
    f2: FloatArray
    f3: FloatArray


def warp_jet(chart: TargetChart, r: FloatArray) -> WarpJet:
    """warped_surface の f(r) を評価する."""
    match chart.warp:
        case WarpFamily.SINH:
            return WarpJet(np.sinh(r), np.cosh(r), np.sinh(r), np.cosh(r))
        case WarpFamily.CUBIC:
            c = chart.warp_coeff
            return WarpJet(r + c * r**3, 1.0 + 3.0 * c * r**2, 6.0 * c * r, np.full_like(r, 6.0 * c))
        case WarpFamily.SIN:
            return WarpJet(np.sin(r), np.cos(r), -np.sin(r), -np.cos(r))
        case WarpFamily.LINEAR:
            return WarpJet(r, np.ones_like(r), np.zeros_like(r), np.zeros_like(r))
    raise ContractError(f"Unknown warp family: {chart.warp}")


def gauss_curvature(chart: TargetChart, y: FloatArray) -> tuple[FloatArray, FloatArray]:
    """断面曲率 K(y) と ∂_I K(y) を返す（2 次元以外の flat/sphere は定数）."""
    y = np.asarray(y, dtype=float)
    lead = y.shape[:-1]
    match chart.kind:
        case TargetKind.FLAT:
            return np.zeros(lead), np.zeros(y.shape)
        case TargetKind.SPHERE:
            return np.ones(lead), np.zeros(y.shape)
    jet = warp_jet(chart, y[..., 0])
    k = -jet.f2 / jet.f
    dk = np.zeros(y.shape)
    dk[..., 0] = -(jet.f3 * jet.f - jet.f2 * jet.f1) / jet.f**2
    return k, dk


def chart_radius_of(chart: TargetChart, y: FloatArray) -> FloatArray:
    """点ごとのチャート半径（warped_surface は r、その他は |y|）."""
    y = np.asarray(y, dtype=float)
    if chart.kind is TargetKind.WARPED_SURFACE:
        return y[..., 0]
    return np.sqrt(np.sum(y * y, axis=-1))


def check_chart(chart: TargetChart, y: FloatArray) -> None:
    """y がチャートの許容領域内にあるか検査する.

    Raises:
        ChartExitError: 許容領域外の点が 1 つでもある、または非有限値を含む。
    """
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != chart.dim:
        raise ContractError("Chart point has wrong dimension", context={"expected": chart.dim, "got": y.shape[-1]})
    if not np.all(np.isfinite(y)):
        raise ChartExitError("Non-finite chart coordinates")
    radius = chart_radius_of(chart, y)
    max_radius = float(np.max(radius)) if radius.size else 0.0
    if chart.kind is TargetKind.WARPED_SURFACE:
        ok = bool(np.all(radius > 0.0)) and max_radius < chart.chart_radius
        if ok:
            ok = bool(np.all(warp_jet(chart, radius).f > 0.0))
    else:
        ok = max_radius < chart.chart_radius
    if not ok:
        raise ChartExitError(
            "Map left the admissible chart region",
            context={"max_radius": max_radius, "chart_radius": chart.chart_radius, "kind": chart.kind.value},
        )


def constant_curvature_tensor(k: FloatArray, G: FloatArray) -> FloatArray:
    """R_IJKL = K(G_IK G_JL − G_IL G_JK)."""
    return k[..., None, None, None, None] * (
        np.einsum("...ik,...jl->...ijkl", G, G) - np.einsum("...il,...jk->...ijkl", G, G)
    )


def target_geometry(chart: TargetChart, y: FloatArray) -> TargetGeometry:
    """チャート点 y における G, Γ, R, ∇R を閉形式で返す.

    Args:
        chart: ターゲットチャート。
        y: 形状 (..., m) のチャート座標。

    Raises:
        ChartExitError: y が許容領域外。
    """
    y = np.asarray(y, dtype=float)
    check_chart(chart, y)
    m = chart.dim
    lead = y.shape[:-1]
    eye = np.eye(m)

    match chart.kind:
        case TargetKind.FLAT:
            G = np.broadcast_to(eye, lead + (m, m)).copy()
            Ginv = G.copy()
            Gamma = np.zeros(lead + (m, m, m))
        case TargetKind.SPHERE:
            sigma = 1.0 + np.sum(y * y, axis=-1)
            lam2 = 4.0 / sigma**2
            G = lam2[..., None, None] * eye
            Ginv = (1.0 / lam2)[..., None, None] * eye
            # 共形平坦: Γ^I_JK = δ^I_J ∂_K u + δ^I_K ∂_J u − δ_JK ∂_I u, u = log(2/σ)
            du = -2.0 * y / sigma[..., None]
            Gamma = (
                np.einsum("ij,...k->...ijk", eye, du)
                + np.einsum("ik,...j->...ijk", eye, du)
                - np.einsum("jk,...i->...ijk", eye, du)
            )
        case TargetKind.WARPED_SURFACE:
            jet = warp_jet(chart, y[..., 0])
            G = np.zeros(lead + (2, 2))
            G[..., 0, 0] = 1.0
            G[..., 1, 1] = jet.f**2
            Ginv = np.zeros(lead + (2, 2))
            Ginv[..., 0, 0] = 1.0
            Ginv[..., 1, 1] = 1.0 / jet.f**2
            Gamma = np.zeros(lead + (2, 2, 2))
            Gamma[..., 0, 1, 1] = -jet.f * jet.f1
            Gamma[..., 1, 0, 1] = jet.f1 / jet.f
            Gamma[..., 1, 1, 0] = jet.f1 / jet.f
        case _:
            raise ContractError(f"Unknown target kind: {chart.kind}")

    k, dk = gauss_curvature(chart, y)
    R = constant_curvature_tensor(k, G)
    # ∇G = 0 より ∇_J R_KLMN = ∂_J K (G_KM G_LN − G_KN G_LM)
    gradR = dk[..., :, None, None, None, None] * constant_curvature_tensor(np.ones(lead), G)[..., None, :, :, :, :]
    R_up = np.einsum("...ip,...pjkl->...ijkl", Ginv, R)
    return TargetGeometry(G=G, Ginv=Ginv, Gamma=Gamma, R=R, R_up=R_up, gradR=gradR)


def curvature_operator(chart: TargetChart, y: FloatArray, X: FloatArray, Y: FloatArray, Z: FloatArray) -> FloatArray:
    """R^P(X,Y)Z = R^I_JKL X^K Y^L Z^J ∂_I."""
    geo = target_geometry(chart, y)
    return np.einsum("...ijkl,...k,...l,...j->...i", geo.R_up, X, Y, Z)


def sharp_gradient_term(chart: TargetChart, y: FloatArray, psi_bilinears: ComplexArray) -> FloatArray:
    """G^{IJ}∇_J R_KLMN⟨ψ^K,ψ^M⟩⟨ψ^L,ψ^N⟩ ∂_I（実数値）.

    Args:
        chart: ターゲットチャート。
        y: チャート点 (..., m)。
        psi_bilinears: エルミートな双線形表 B[..., K, M] = ⟨ψ^K, ψ^M⟩。

    Raises:
        ContractError: 縮約の虚部が丸め誤差を超えた（入力がエルミートでない）。
    """
    geo = target_geometry(chart, y)
    return sharp_gradient_from_geometry(geo, psi_bilinears)


def sharp_gradient_from_geometry(geo: TargetGeometry, psi_bilinears: ComplexArray) -> FloatArray:
    """評価済み幾何量から sharp_gradient_term を計算する."""
    value = np.einsum("...ij,...jklmn,...km,...ln->...i", geo.Ginv, geo.gradR, psi_bilinears, psi_bilinears)
    scale = 1.0 + float(np.max(np.abs(value.real))) if value.size else 1.0
    if value.size and float(np.max(np.abs(value.imag))) > IMAG_TOLERANCE * scale:
        raise ContractError("Gradient-curvature contraction is not real; bilinear table must be hermitian")
    return np.ascontiguousarray(value.real)


def metric_derivative(geo: TargetGeometry) -> FloatArray:
    """∂_L G_IJ = G_IK Γ^K_LJ + G_JK Γ^K_LI を [..., L, I, J] で返す（計量両立性から）."""
    return np.einsum("...ik,...klj->...lij", geo.G, geo.Gamma) + np.einsum("...jk,...kli->...lij", geo.G, geo.Gamma)


def chart_norm(chart: TargetChart, phi: FloatArray) -> float:
    """格子全体で到達した最大チャート半径."""
    radius = chart_radius_of(chart, phi)
    return float(np.max(radius)) if radius.size else 0.0
