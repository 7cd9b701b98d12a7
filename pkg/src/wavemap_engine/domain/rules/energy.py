"""Rules: energy densities, total energies and the Grönwall bound check.

設計意図:
- e_k(φ) = s²|D^kπ|² + |D^kDφ|²、e_k(ψ) = s²|D^kχ|²_+ + |D^{k+1}ψ|²_+（正定値積 (·,·)_+ = ⟨·, γ_0·⟩）。
- F_r(φ,ψ) = Σ_{k≤r}E_k(φ) + Σ_{k≤r−1}E_k(ψ) + ‖ψ‖²_{L²}、r は次元ごとの最小値。
- Grönwall 定数 Ĉ は理論定数を再構成せず、地平の先頭区間で dF/dt ≤ Ĉ(s⁻¹+f)F を満たす最小値として当てはめる。
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from wavemap_engine.contract.errors import ContractError
from wavemap_engine.contract.schemas.reports import EnergyReport, GronwallVerdict, VerdictStatus
from wavemap_engine.domain.rules.dynamics import dirac_residual, map_source_terms, slice_coefficients, spinor_source_terms
from wavemap_engine.domain.rules.fields import (
    ConnectionContext,
    FieldState,
    Grid,
    covariant_D,
    covariant_D_direction,
    covariant_D_power,
    l2_integral,
    pointwise_inner,
    pointwise_norm2,
    regularity_index,
)
from wavemap_engine.domain.rules.geometry import (
    WarpedSpacetime,
    expansion_rate,
    phi_cumulative,
    s_inverse_integrable,
    smallness_threshold,
)
from wavemap_engine.domain.rules.spin import connection_context, spin_connection_time_derivative
from wavemap_engine.domain.rules.target import TargetChart

logger = logging.getLogger(__name__)

BOUND_SLACK = 1e-12


def _context(state: FieldState, st: WarpedSpacetime, chart: TargetChart, grid: Grid) -> ConnectionContext:
    return connection_context(st, chart, grid, state.phi, state.t)


def energy_map(
    state: FieldState,
    st: WarpedSpacetime,
    chart: TargetChart,
    grid: Grid,
    k: int,
    *,
    ctx: ConnectionContext | None = None,
) -> float:
    """E_k(φ) = ∫ s²|D^kπ|² + |D^kDφ|² dV_{g_t}.

    Raises:
        ContractError: k が 0..r の範囲外。
    """
    r = regularity_index(st.n)
    if not 0 <= k <= r:
        raise ContractError("Map energy order out of range", context={"k": k, "r": r})
    ctx = ctx or _context(state, st, chart, grid)
    s = st.s_jet(state.t).value
    d_pi = covariant_D_power(state.pi, ctx, k)
    d_dphi = covariant_D_power(ctx.dphi, ctx, k)
    density = s**2 * pointwise_norm2(d_pi, ctx, n_slots=k) + pointwise_norm2(d_dphi, ctx, n_slots=k + 1)
    return max(0.0, l2_integral(density, grid, ctx.a))


def energy_spinor(
    state: FieldState,
    st: WarpedSpacetime,
    chart: TargetChart,
    grid: Grid,
    k: int,
    *,
    ctx: ConnectionContext | None = None,
) -> float:
    """E_k(ψ) = ∫ s²|D^kχ|²_+ + |D^{k+1}ψ|²_+ dV_{g_t}.

    Raises:
        ContractError: k が 0..r−1 の範囲外。
    """
    r = regularity_index(st.n)
    if not 0 <= k <= r - 1:
        raise ContractError("Spinor energy order out of range", context={"k": k, "r": r})
    ctx = ctx or _context(state, st, chart, grid)
    s = st.s_jet(state.t).value
    d_chi = covariant_D_power(state.chi, ctx, k, spinor=True)
    d_psi = covariant_D_power(state.psi, ctx, k + 1, spinor=True)
    density = s**2 * pointwise_norm2(d_chi, ctx, n_slots=k, spinor=True) + pointwise_norm2(
        d_psi, ctx, n_slots=k + 1, spinor=True
    )
    return max(0.0, l2_integral(density, grid, ctx.a))


def total_energy(
    state: FieldState,
    st: WarpedSpacetime,
    chart: TargetChart,
    grid: Grid,
    *,
    with_residual: bool = True,
) -> EnergyReport:
    """時間スライスの EnergyReport を組み立てる（bound 列は gronwall_check 後に埋める）."""
    r = regularity_index(st.n)
    ctx = _context(state, st, chart, grid)
    e_map = tuple(energy_map(state, st, chart, grid, k, ctx=ctx) for k in range(r + 1))
    e_spin = tuple(energy_spinor(state, st, chart, grid, k, ctx=ctx) for k in range(r))
    psi_l2 = max(0.0, l2_integral(pointwise_norm2(state.psi, ctx, n_slots=0, spinor=True), grid, ctx.a))
    f_map = float(sum(e_map))
    f_spin = float(sum(e_spin)) + psi_l2
    dirac_res = dirac_residual(state, st, chart, grid) if with_residual else 0.0
    return EnergyReport(
        t=state.t,
        E_map=e_map,
        E_spin=e_spin,
        psi_l2=psi_l2,
        F_map=f_map,
        F_spin=f_spin,
        F_total=f_map + f_spin,
        dirac_res=dirac_res,
    )


# ---- k = 0 のエネルギー発展恒等式 ---------------------------------------------------


@dataclass(frozen=True, slots=True)
class EnergyRate:
    """dE_0/dt の内訳.

    Attributes:
        wave: 2Re∫⟨□ξ, ∇_tξ⟩
        expansion: ½∫(|Dξ|² − s²|∇_tξ|²) tr ġ
        slot: −2(ȧ/a)∫|Dξ|²（[∇_t, D] の接ベクトルスロット部分）
        connection: 4Re∫ g^{ij}(∇_tψ, ω_iD_jψ)_+（a ≡ const で 0）
        curvature: 2Re∫ g^{ij}((R^S(∂_t,∂_i) + R^P(π,∂_iφ))ψ, D_jψ)_+
    """

    wave: float
    expansion: float
    slot: float
    connection: float = 0.0
    curvature: float = 0.0

    @property
    def total(self) -> float:
        return self.wave + self.expansion + self.slot + self.connection + self.curvature


def energy_rate_map(
    state: FieldState,
    st: WarpedSpacetime,
    chart: TargetChart,
    grid: Grid,
    *,
    box: np.ndarray | None = None,
) -> EnergyRate:
    """写像の dE_0/dt 恒等式の右辺（box 省略時は方程式の右辺を □φ とする）."""
    ctx = _context(state, st, chart, grid)
    coeffs = slice_coefficients(st, grid, state.t)
    if box is None:
        box = map_source_terms(state, st, ctx, coeffs).total()
    grad2 = l2_integral(pointwise_norm2(ctx.dphi, ctx, n_slots=1), grid, ctx.a)
    pi2 = l2_integral(pointwise_norm2(state.pi, ctx, n_slots=0), grid, ctx.a)
    wave = 2.0 * l2_integral(np.real(pointwise_inner(box, state.pi, ctx, n_slots=0)), grid, ctx.a)
    return EnergyRate(
        wave=wave,
        expansion=0.5 * (grad2 - coeffs.s**2 * pi2) * coeffs.tr_gdot,
        slot=-2.0 * coeffs.ad / coeffs.a * grad2,
    )


def energy_rate_spinor(
    state: FieldState,
    st: WarpedSpacetime,
    chart: TargetChart,
    grid: Grid,
    *,
    box: np.ndarray | None = None,
) -> EnergyRate:
    """スピノルの dE_0/dt 恒等式の右辺.

    正定値積は空間方向に平行でないため、ω_i を含む項が加わる。
    """
    ctx = _context(state, st, chart, grid)
    coeffs = slice_coefficients(st, grid, state.t)
    if box is None:
        box = spinor_source_terms(state, st, ctx, coeffs).total()
    a = coeffs.a
    d_psi = covariant_D(state.psi, ctx, spinor=True)
    grad2 = l2_integral(pointwise_norm2(d_psi, ctx, n_slots=1, spinor=True), grid, a)
    chi2 = l2_integral(pointwise_norm2(state.chi, ctx, n_slots=0, spinor=True), grid, a)
    wave = 2.0 * l2_integral(np.real(pointwise_inner(box, state.chi, ctx, n_slots=0, spinor=True)), grid, a)

    omega_dt = spin_connection_time_derivative(st, state.t)
    connection = 0.0
    curvature_term = 0.0
    for i in range(grid.d):
        d_i = covariant_D_direction(state.psi, ctx, i, spinor=True)
        omega_d = np.einsum("ab,...b->...a", ctx.omega[i], d_i)
        connection += 4.0 * l2_integral(np.real(pointwise_inner(state.chi, omega_d, ctx, n_slots=0, spinor=True)), grid, a)
        r_p = curvature_endomorphism_vectors(ctx, state.pi, ctx.dphi[..., i, :])
        rotated = np.einsum("ab,...b->...a", omega_dt[i], state.psi) + np.einsum("...ik,...kc->...ic", r_p, state.psi)
        curvature_term += 2.0 * l2_integral(np.real(pointwise_inner(rotated, d_i, ctx, n_slots=0, spinor=True)), grid, a)
    return EnergyRate(
        wave=wave,
        expansion=0.5 * (grad2 - coeffs.s**2 * chi2) * coeffs.tr_gdot,
        slot=-2.0 * coeffs.ad / a * grad2,
        connection=connection / a**2,
        curvature=curvature_term / a**2,
    )


def curvature_endomorphism_vectors(ctx: ConnectionContext, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """R^P(X, Y)^I_J = R^I_JKL X^K Y^L（接ベクトル引数の曲率作用素）."""
    return np.einsum("...ijkl,...k,...l->...ij", ctx.geometry.R_up, X, Y)


# ---- Grönwall ------------------------------------------------------------------------


def _bound_ratio(value: float, bound: float) -> float:
    if bound > 0.0:
        return float(value / bound)
    # F(0) = 0 のとき上界は恒等的に 0
    return 1.0 if value <= 0.0 else float("inf")


def gronwall_check(
    series: Sequence[EnergyReport],
    st: WarpedSpacetime,
    *,
    fit_fraction: float = 0.1,
    ratio_limit: float = 2.0,
    horizon: float | None = None,
) -> GronwallVerdict:
    """F(t) ≤ F(0)·exp(Ĉ·Φ(t)) を検査する.

    Args:
        series: 時刻順の EnergyReport。
        st: 背景時空。
        fit_fraction: Ĉ を当てはめる先頭区間の割合。
        ratio_limit: 合格とする F/bound の上限。
        horizon: 地平 T（None なら series の最終時刻）。

    Returns:
        GronwallVerdict。s⁻¹ が可積分でない背景では status=outside_hypotheses, passed=None。

    Raises:
        ContractError: series が空、または F(0) > 1（証明のブートストラップ領域外）。
    """
    if not series:
        raise ContractError("Energy series must be non-empty")
    F0 = series[0].F_total
    if F0 > 1.0:
        raise ContractError("Gronwall fit requires F(0) <= 1", context={"F0": F0})

    times = np.array([row.t for row in series], dtype=float)
    F = np.array([row.F_total for row in series], dtype=float)
    t0 = float(times[0])
    T = float(times[-1]) if horizon is None else float(horizon)
    fit_until = t0 + fit_fraction * (T - t0)

    c_hat = 0.0
    if times.size >= 2 and F0 > 0.0:
        dF = np.gradient(F, times)
        rates = np.array([expansion_rate(st, float(t)) for t in times])
        window = (times <= fit_until + 1e-12) & (F > 0.0) & (rates > 0.0)
        if np.any(window):
            c_hat = max(0.0, float(np.max(dF[window] / (rates[window] * F[window]))))

    phi = phi_cumulative(st, times)
    # 上界は先頭標本 t_0 からの増分 Φ(t) − Φ(t_0) で張る
    bound = F0 * np.exp(c_hat * (phi - phi[0]))
    ratio = np.array([_bound_ratio(f, b) for f, b in zip(F, bound, strict=True)])
    max_ratio = float(np.max(ratio))
    bound_ok = tuple(bool(f <= ratio_limit * b * (1.0 + BOUND_SLACK)) for f, b in zip(F, bound, strict=True))

    threshold = smallness_threshold(st)
    threshold_ok = None if threshold is None else bool(F0 <= threshold)

    if not s_inverse_integrable(st):
        status, passed = VerdictStatus.OUTSIDE_HYPOTHESES, None
        logger.warning("gronwall: s^-1 not integrable; reporting outside_hypotheses (max_ratio=%.4g)", max_ratio)
    elif max_ratio <= ratio_limit:
        status, passed = VerdictStatus.PASS, True
    else:
        status, passed = VerdictStatus.FAIL, False
        logger.warning("gronwall: bound violated (max_ratio=%.4g > %.4g)", max_ratio, ratio_limit)

    return GronwallVerdict(
        status=status,
        passed=passed,
        c_hat=c_hat,
        max_ratio=max_ratio,
        ratio_limit=ratio_limit,
        fit_until=fit_until,
        F0=F0,
        phi_final=float(phi[-1]),
        threshold=threshold,
        threshold_ok=threshold_ok,
        bound_values=tuple(float(b) for b in bound),
        bound_ok=bound_ok,
    )


def apply_bounds(series: Sequence[EnergyReport], verdict: GronwallVerdict) -> list[EnergyReport]:
    """判定の bound_value / bound_ok を各行へ書き戻す."""
    if len(verdict.bound_values) != len(series):
        raise ContractError("Verdict does not match the series length")
    return [
        row.model_copy(update={"bound_value": value, "bound_ok": ok})
        for row, value, ok in zip(series, verdict.bound_values, verdict.bound_ok, strict=True)
    ]
