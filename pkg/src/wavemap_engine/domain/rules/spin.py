"""Rules: Clifford algebra, spinor pairings, spin connection and twisted Dirac operators.

設計意図:
- 正規直交フレーム e_0 = s∂_t, e_i = a⁻¹∂_i 上の定数ガンマ行列 γ_0 = σ₁, γ_1 = iσ₂, γ_2 = iσ₃（β = γ_0）。
  不定値対 ⟨ψ,ξ⟩ = (βψ)†ξ、正定値積 (ψ,ξ) = ⟨ψ,γ_0ξ⟩ = ψ†ξ。
- スピン接続は ω_t = 0, ω_i = −(sȧ/2)γ_0γ_i。符号は Clifford 乗法の平行性 [ω_i, γ_0] = γ(∇_ie_0) で固定する。
- スピン構造は周期的（自明）なもののみ扱う。
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import NDArray

from wavemap_engine.contract.errors import ContractError, ProfileDomainError
from wavemap_engine.domain.rules.fields import ConnectionContext, FieldState, Grid, covariant_D_direction, pullback_context
from wavemap_engine.domain.rules.geometry import WarpedSpacetime, curvature, metric_components
from wavemap_engine.domain.rules.target import TargetChart

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]

GAMMA: ComplexArray = np.array(
    [
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, 1.0], [-1.0, 0.0]],
        [[1j, 0.0], [0.0, -1j]],
    ],
    dtype=complex,
)
BETA: ComplexArray = GAMMA[0].copy()
IDENTITY: ComplexArray = np.eye(2, dtype=complex)


class RescaleDirection(str, Enum):
    """conformal_rescale の向き."""

    TO_CONFORMAL = "to_conformal"
    FROM_CONFORMAL = "from_conformal"


@dataclass(frozen=True, slots=True)
class SpinFrame:
    """符号 (−,+,…,+) の Clifford 代数表現（スピノル階数 2）."""

    n: int

    def __post_init__(self) -> None:
        if self.n not in (2, 3):
            raise ContractError("Spin frame supports n = 2 or 3", context={"n": self.n})

    @property
    def gamma(self) -> ComplexArray:
        """γ_0, …, γ_{n−1}（(n, 2, 2)）."""
        return GAMMA[: self.n]

    @property
    def beta(self) -> ComplexArray:
        """不定値対を定める β."""
        return BETA

    @property
    def eta(self) -> FloatArray:
        """η = diag(−1, +1, …)."""
        return np.diag([-1.0] + [1.0] * (self.n - 1))


@dataclass(frozen=True, slots=True)
class SpinConnection:
    """座標方向のスピン接続係数.

    Attributes:
        omega_t: ω_t（このフレームでは 0）
        omega_i: ω_i（(n−1, 2, 2)）
    """

    omega_t: ComplexArray
    omega_i: ComplexArray


def clifford(frame: SpinFrame, alpha: int, psi: ComplexArray) -> ComplexArray:
    """γ_α ψ（最後の軸がスピノル添字）."""
    if not 0 <= alpha < frame.n:
        raise ContractError("Clifford index out of range", context={"alpha": alpha, "n": frame.n})
    return np.einsum("ab,...b->...a", frame.gamma[alpha], psi)


def indefinite_pairing(psi: ComplexArray, xi: ComplexArray) -> NDArray:
    """⟨ψ, ξ⟩ = (βψ)†ξ を最後の軸で縮約する."""
    return np.einsum("...a,ab,...b->...", np.conj(psi), BETA, xi)


def positive_pairing(psi: ComplexArray, xi: ComplexArray) -> NDArray:
    """(ψ, ξ) = ⟨ψ, γ_0ξ⟩ = ψ†ξ."""
    return np.einsum("...a,...a->...", np.conj(psi), xi)


def coordinate_clifford(st: WarpedSpacetime, t: float) -> ComplexArray:
    """座標ベクトルの Clifford 作用 ∂_t· = s⁻¹γ_0, ∂_i· = aγ_i を (n, 2, 2) で返す."""
    s = st.s_jet(t).value
    a = st.a_jet(t).value
    scales = np.array([1.0 / s] + [a] * st.d)
    return scales[:, None, None] * GAMMA[: st.n]


def spin_connection(st: WarpedSpacetime, t: float) -> SpinConnection:
    """ω_t = 0, ω_i = −(sȧ/2)γ_0γ_i."""
    coeff = -0.5 * st.s_jet(t).value * st.a_jet(t).d1
    omega_i = np.stack([coeff * GAMMA[0] @ GAMMA[i] for i in range(1, st.n)])
    return SpinConnection(omega_t=np.zeros((2, 2), dtype=complex), omega_i=omega_i)


def spin_connection_time_derivative(st: WarpedSpacetime, t: float) -> ComplexArray:
    """∂_tω_i（解析式）."""
    sj = st.s_jet(t)
    aj = st.a_jet(t)
    coeff = -0.5 * (sj.d1 * aj.d1 + sj.value * aj.d2)
    return np.stack([coeff * GAMMA[0] @ GAMMA[i] for i in range(1, st.n)])


def spinor_curvature(st: WarpedSpacetime, t: float, mu: int, nu: int) -> ComplexArray:
    """R^S(∂_μ, ∂_ν) = ¼ Σ_ab ε_aε_b h(R(∂_μ,∂_ν)e_a, e_b) γ_aγ_b.

    時空 Riemann テンソルから組み立てる（ω の微分は使わない）。
    """
    n = st.n
    if not (0 <= mu < n and 0 <= nu < n):
        raise ContractError("Coordinate index out of range", context={"mu": mu, "nu": nu, "n": n})
    s = st.s_jet(t).value
    a = st.a_jet(t).value
    riemann = curvature(st, t).riemann
    h = metric_components(st, t)
    # フレーム成分 E[a, σ] = e_a^σ
    frame = np.diag([s] + [1.0 / a] * st.d)
    eps = np.array([-1.0] + [1.0] * st.d)
    rmat = np.einsum("rs,as->ar", riemann[:, :, mu, nu], frame)
    coeff = np.einsum("ar,rl,bl->ab", rmat, h, frame) * eps[:, None] * eps[None, :]
    gamma = GAMMA[:n]
    return 0.25 * np.einsum("ab,aij,bjk->ik", coeff, gamma, gamma)


def connection_context(
    st: WarpedSpacetime,
    chart: TargetChart,
    grid: Grid,
    phi: FloatArray,
    t: float,
) -> ConnectionContext:
    """pullback 接続とスピン接続をまとめた ConnectionContext を返す."""
    if grid.d != st.d:
        raise ContractError("Grid dimension does not match spacetime", context={"grid": grid.d, "spacetime": st.d})
    omega = spin_connection(st, t).omega_i
    return pullback_context(chart, grid, phi, st.a_jet(t).value, omega=omega)


def _spin_apply(M: NDArray, field: NDArray) -> NDArray:
    """2×2 行列（定数または格子上の場）をスピノル添字へ作用させる."""
    if M.ndim == 2:
        return np.einsum("ab,...b->...a", M, field)
    # M: (*grid, 2, 2), field: (*grid, m, 2)
    return np.einsum("...ab,...mb->...ma", M, field)


def spatial_dirac(psi: ComplexArray, ctx: ConnectionContext) -> ComplexArray:
    """D̸ の空間部分 a⁻¹ Σ_i γ_i ∇_iψ."""
    out = np.zeros_like(psi, dtype=complex)
    for i in range(ctx.grid.d):
        out = out + _spin_apply(GAMMA[i + 1], covariant_D_direction(psi, ctx, i, spinor=True))
    return out / ctx.a


def dirac_apply(psi: ComplexArray, chi: ComplexArray, ctx: ConnectionContext, st: WarpedSpacetime, t: float) -> ComplexArray:
    """D̸ψ = −s²(∂_t·)χ + g^{ij}(∂_i·)∇_jψ = −sγ_0χ + a⁻¹Σγ_i∇_iψ.

    Args:
        psi: ψ（(*grid, m, 2)）。
        chi: 時間スロット ∇_tψ。
        ctx: φ と t で評価した接続データ。
        st: 背景時空。
        t: 時刻。
    """
    s = st.s_jet(t).value
    return -s * _spin_apply(GAMMA[0], chi) + spatial_dirac(psi, ctx)


def dirac(
    state: FieldState,
    st: WarpedSpacetime,
    chart: TargetChart,
    grid: Grid,
    *,
    ctx: ConnectionContext | None = None,
) -> ComplexArray:
    """状態の ψ, χ に twisted Dirac 作用素を作用させる.

    Raises:
        ChartExitError: φ がチャート外。
    """
    if ctx is None:
        ctx = connection_context(st, chart, grid, state.phi, state.t)
    return dirac_apply(state.psi, state.chi, ctx, st, state.t)


def gradient_clifford(st: WarpedSpacetime, t: float, du_t: FloatArray, du_x: FloatArray) -> ComplexArray:
    """γ(∇u) = −s ∂_tu γ_0 + a⁻¹ Σ ∂_iu γ_i を格子上の (*grid, 2, 2) で返す.

    Args:
        du_t: ∂_tu（(*grid)）。
        du_x: ∂_iu（(*grid, d)）。
    """
    s = st.s_jet(t).value
    a = st.a_jet(t).value
    out = -s * du_t[..., None, None] * GAMMA[0]
    for i in range(st.d):
        out = out + du_x[..., i, None, None] * GAMMA[i + 1] / a
    return out


def dirac_conformal(
    psi: ComplexArray,
    chi: ComplexArray,
    ctx: ConnectionContext,
    st: WarpedSpacetime,
    t: float,
    u: FloatArray,
    du_t: FloatArray,
    du_x: FloatArray,
) -> ComplexArray:
    """共形計量 e^{2u}h の Dirac 作用素（フレーム同一視 ē_α = e^{−u}e_α）.

    接続は ∇̄_βψ = ∇_βψ − ½∂_β·γ(∇u)ψ − ½∂_βu ψ として座標方向ごとに組み立て、
    D̸̄ψ = e^{−2u} Σ_β h^{ββ} e^{u}(∂_β·)∇̄_βψ を返す。chi は h に関する ∇_tψ。
    """
    cliff = coordinate_clifford(st, t)
    grad = gradient_clifford(st, t, du_t, du_x)
    h_inv = 1.0 / np.diag(metric_components(st, t))
    slots = [chi] + [covariant_D_direction(psi, ctx, i, spinor=True) for i in range(ctx.grid.d)]
    derivs = [du_t] + [du_x[..., i] for i in range(ctx.grid.d)]
    total = np.zeros_like(psi, dtype=complex)
    for beta_idx, (slot, du) in enumerate(zip(slots, derivs, strict=True)):
        correction = -0.5 * np.einsum("ab,...bc->...ac", cliff[beta_idx], grad)
        nabla_bar = slot + _spin_apply(correction, psi) - 0.5 * du[..., None, None] * psi
        total = total + h_inv[beta_idx] * _spin_apply(cliff[beta_idx], nabla_bar)
    return np.exp(-u)[..., None, None] * total


def conformal_rescale(psi: ComplexArray, ns: FloatArray, n: int, direction: RescaleDirection | str) -> ComplexArray:
    """スピノルの共形再スケール（to_conformal で (Ns)^{(1−n)/2} 倍、from_conformal で逆）.

    Raises:
        ProfileDomainError: Ns が正でない点がある。
    """
    ns = np.asarray(ns, dtype=float)
    if not np.all(ns > 0.0):
        raise ProfileDomainError("Conformal factor Ns must be positive")
    direction = RescaleDirection(direction)
    exponent = 0.5 * (1 - n)
    if direction is RescaleDirection.FROM_CONFORMAL:
        exponent = -exponent
    factor = ns**exponent
    return factor.reshape(factor.shape + (1,) * (psi.ndim - factor.ndim)) * psi
