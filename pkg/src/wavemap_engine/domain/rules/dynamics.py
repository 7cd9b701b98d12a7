"""Rules: right-hand sides of the rescaled Dirac-wave map system and the RK4 integrator.

設計意図:
- 積分するのは共形再スケール後の系のみ。写像は ∂²_tφ、スピノルは ∇²_tψ を解いて返す。
- 発展変数は座標成分 (φ, π, ψ, χ)。共変時間微分との差は ∂_tψ = χ − Γ(π)ψ, ∂_tχ = ∇²_tψ − Γ(π)χ で吸収する。
- Dirac 方程式 iD̸ψ = ⅓(Ns)^{2−n}R^P(ψ,ψ)ψ は拘束として監視し、初期データで満たすよう χ を解く。
- ソース項は名前付きの部分項として返し、退化ケース（球面・n=2・ψ=0）の厳密ゼロを個別に検査できるようにする。
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import brentq

from wavemap_engine.contract.errors import CFLViolationError, ContractError, NumericalAbortError, ProfileDomainError
from wavemap_engine.domain.rules.fields import (
    ConnectionContext,
    FieldState,
    Grid,
    covariant_D_direction,
    fd_partial,
    l2_integral,
    map_rough_laplacian,
    pointwise_norm2,
    regularity_index,
    rough_laplacian,
    sobolev_norm2,
)
from wavemap_engine.domain.rules.geometry import WarpedSpacetime, curvature, lapse_field
from wavemap_engine.domain.rules.spin import (
    BETA,
    GAMMA,
    connection_context,
    coordinate_clifford,
    spatial_dirac,
)
from wavemap_engine.domain.rules.target import (
    TargetChart,
    TargetGeometry,
    check_chart,
    sharp_gradient_from_geometry,
    target_geometry,
)

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]

RESIDUAL_FLOOR = 1e-30
CFL_SLACK = 1e-12


@dataclass(frozen=True, slots=True)
class SliceCoefficients:
    """時刻 t の背景係数と格子上のラプス.

    Attributes:
        s, sd: s と ṡ
        a, ad: a と ȧ
        tr_gdot: tr ġ = 2(n−1)ȧ/a
        scal: h のスカラー曲率
        ns: Ns（(*grid)）
        dlog_ns_t: ∂_t log(Ns)
        dlog_ns_x: ∂_i log(Ns)（(*grid, d)）
        dlog_n_t: ∂_tN/N
        dlog_n_x: ∂_iN/N（(*grid, d)）
    """

    s: float
    sd: float
    a: float
    ad: float
    tr_gdot: float
    scal: float
    ns: FloatArray
    dlog_ns_t: FloatArray
    dlog_ns_x: FloatArray
    dlog_n_t: FloatArray
    dlog_n_x: FloatArray


def slice_coefficients(st: WarpedSpacetime, grid: Grid, t: float) -> SliceCoefficients:
    """背景係数を評価する.

    Raises:
        ProfileDomainError: s, a, N のいずれかが正でない。
    """
    sj = st.s_jet(t)
    aj = st.a_jet(t)
    x1 = grid.coords()[0]
    lapse = lapse_field(st, t, x1)
    if not np.all(lapse.value > 0.0):
        raise ProfileDomainError("Lapse N must be positive", context={"t": t})
    dlog_n_t = lapse.dt / lapse.value
    dlog_n_x = np.zeros(grid.shape + (grid.d,))
    dlog_n_x[..., 0] = lapse.dx1 / lapse.value
    return SliceCoefficients(
        s=sj.value,
        sd=sj.d1,
        a=aj.value,
        ad=aj.d1,
        tr_gdot=2.0 * st.d * aj.d1 / aj.value,
        scal=curvature(st, t).scal,
        ns=lapse.value * sj.value,
        dlog_ns_t=dlog_n_t + sj.d1 / sj.value,
        dlog_ns_x=dlog_n_x,
        dlog_n_t=dlog_n_t,
        dlog_n_x=dlog_n_x,
    )


@dataclass(frozen=True, slots=True)
class MapSourceTerms:
    """写像方程式の右辺（□φ = lapse + spinor_coupling + sharp_gradient）."""

    lapse: FloatArray
    spinor_coupling: FloatArray
    sharp_gradient: FloatArray

    def total(self) -> FloatArray:
        return self.lapse + self.spinor_coupling + self.sharp_gradient


@dataclass(frozen=True, slots=True)
class SpinorSourceTerms:
    """スピノル方程式の右辺の部分項.

    Attributes:
        scalar_curvature: −scal/4 ψ
        twist: −½ h^{αγ}h^{βδ} ∂_α·∂_β· R^P(dφ(∂_γ), dφ(∂_δ))ψ
        grad_curvature: −(i/3)(Ns)^{2−n} h^{αβ}∂_α·(∇_{dφ(∂_β)}R^P)(ψ,ψ)ψ
        psi_derivative: −(i/3)(Ns)^{2−n} h^{αβ}∂_α·[R^P(∇_βψ,ψ) + R^P(ψ,∇_βψ)]ψ
        lapse_derivative: −(i/3)(2−n)(Ns)^{2−n} h^{αβ}∂_βlog(Ns) ∂_α·R^P(ψ,ψ)ψ
        quartic: −(1/9)(Ns)^{4−2n} R^P(ψ,ψ)R^P(ψ,ψ)ψ
    """

    scalar_curvature: ComplexArray
    twist: ComplexArray
    grad_curvature: ComplexArray
    psi_derivative: ComplexArray
    lapse_derivative: ComplexArray
    quartic: ComplexArray

    def total(self) -> ComplexArray:
        return (
            self.scalar_curvature
            + self.twist
            + self.grad_curvature
            + self.psi_derivative
            + self.lapse_derivative
            + self.quartic
        )


@dataclass(frozen=True, slots=True)
class RhsOutput:
    """最高階時間微分.

    Attributes:
        d2phi: ∂²_tφ^I
        d2psi: ∇²_tψ^I
    """

    d2phi: FloatArray
    d2psi: ComplexArray


# ---- 双線形形式と曲率自己準同型 ------------------------------------------------------


def spinor_bilinears(psi: ComplexArray, matrix: ComplexArray | None = None, other: ComplexArray | None = None) -> ComplexArray:
    """B[..., K, L] = ⟨ψ^K, M ξ^L⟩（不定値対、M 省略時は単位行列、ξ 省略時は ψ）."""
    right = psi if other is None else other
    if matrix is not None:
        right = np.einsum("ab,...lb->...la", matrix, right)
    return np.einsum("...ka,ab,...lb->...kl", np.conj(psi), BETA, right)


def curvature_endomorphism(geometry: TargetGeometry, psi: ComplexArray, other: ComplexArray | None = None) -> ComplexArray:
    """R^P(ψ, ξ)^I_K = R^I_JKL ⟨ψ^J, ξ^L⟩（ξ 省略時は ψ）."""
    return np.einsum("...ijkl,...jl->...ik", geometry.R_up, spinor_bilinears(psi, other=other))


def _apply_endomorphism(E: ComplexArray, psi: ComplexArray) -> ComplexArray:
    return np.einsum("...ik,...kc->...ic", E, psi)


def _spin(M: ComplexArray, psi: ComplexArray) -> ComplexArray:
    return np.einsum("ab,...b->...a", M, psi)


def _time_connection(geometry: TargetGeometry, pi: FloatArray) -> FloatArray:
    """Γ(π)^I_K = Γ^I_JK π^J."""
    return np.einsum("...ijk,...j->...ik", geometry.Gamma, pi)


def dirac_source(
    psi: ComplexArray,
    geometry: TargetGeometry,
    coeffs: SliceCoefficients,
    n: int,
    *,
    coefficient: float = 1.0 / 3.0,
) -> ComplexArray:
    """Dirac 拘束の右辺 coefficient·(Ns)^{2−n}R^P(ψ,ψ)ψ."""
    weight = coeffs.ns ** (2 - n)
    E = curvature_endomorphism(geometry, psi)
    return coefficient * weight[..., None, None] * _apply_endomorphism(E, psi)


# ---- 写像方程式 ---------------------------------------------------------------------


def map_source_terms(
    state: FieldState,
    st: WarpedSpacetime,
    ctx: ConnectionContext,
    coeffs: SliceCoefficients,
) -> MapSourceTerms:
    """□φ の右辺を部分項ごとに評価する."""
    n = st.n
    s, a = coeffs.s, coeffs.a
    pi = state.pi
    psi = state.psi

    lapse_grad = np.einsum("...i,...ij->...j", coeffs.dlog_n_x, ctx.dphi) / a**2
    lapse = (n - 2) * (
        -s * coeffs.sd * pi - s**2 * coeffs.dlog_n_t[..., None] * pi + lapse_grad
    )

    weight = coeffs.ns ** (2 - n)
    coupling = -s * np.einsum("...ijkl,...kl,...j->...i", ctx.geometry.R_up, spinor_bilinears(psi, 1j * GAMMA[0]), pi)
    for i in range(st.d):
        bil = spinor_bilinears(psi, 1j * GAMMA[i + 1])
        coupling = coupling + np.einsum("...ijkl,...kl,...j->...i", ctx.geometry.R_up, bil, ctx.dphi[..., i, :]) / a
    spinor_coupling = -0.5 * weight[..., None] * np.real(coupling)

    sharp = sharp_gradient_from_geometry(ctx.geometry, spinor_bilinears(psi))
    sharp_gradient = (coeffs.ns ** (4 - 2 * n))[..., None] * sharp / 12.0
    return MapSourceTerms(lapse=lapse, spinor_coupling=spinor_coupling, sharp_gradient=sharp_gradient)


def rhs_map(
    state: FieldState,
    st: WarpedSpacetime,
    chart: TargetChart,
    grid: Grid,
    *,
    ctx: ConnectionContext | None = None,
    coeffs: SliceCoefficients | None = None,
) -> FloatArray:
    """∂²_tφ = s⁻²[RHS − sṡπ − ½s² tr ġ π − D*Dφ] − Γ(π,π).

    Raises:
        ChartExitError: φ がチャート外。
    """
    if ctx is None:
        ctx = connection_context(st, chart, grid, state.phi, state.t)
    if coeffs is None:
        coeffs = slice_coefficients(st, grid, state.t)
    s = coeffs.s
    pi = state.pi
    source = map_source_terms(state, st, ctx, coeffs).total()
    box_rest = -s * coeffs.sd * pi - 0.5 * s**2 * coeffs.tr_gdot * pi - map_rough_laplacian(state.phi, ctx)
    christoffel_pi = np.einsum("...ijk,...j,...k->...i", ctx.geometry.Gamma, pi, pi)
    return (source + box_rest) / s**2 - christoffel_pi


def wave_map_rhs(phi: FloatArray, pi: FloatArray, st: WarpedSpacetime, chart: TargetChart, grid: Grid, t: float) -> FloatArray:
    """ψ を持たない波動写像方程式の ∂²_tφ（座標 2 階差分による独立実装）."""
    geo = target_geometry(chart, phi)
    coeffs = slice_coefficients(st, grid, t)
    s, a, n = coeffs.s, coeffs.a, st.n
    spatial = np.zeros_like(phi)
    lapse_grad = np.zeros_like(phi)
    for i in range(grid.d):
        d_i = fd_partial(phi, i, grid)
        spatial = spatial + fd_partial(d_i, i, grid) + np.einsum("...ijk,...j,...k->...i", geo.Gamma, d_i, d_i)
        lapse_grad = lapse_grad + coeffs.dlog_n_x[..., i, None] * d_i
    lapse = (n - 2) * (-s * coeffs.sd * pi - s**2 * coeffs.dlog_n_t[..., None] * pi + lapse_grad / a**2)
    damping = -(coeffs.sd / s) * pi - 0.5 * coeffs.tr_gdot * pi
    return damping + (spatial / a**2 + lapse) / s**2 - np.einsum("...ijk,...j,...k->...i", geo.Gamma, pi, pi)


# ---- スピノル方程式 -------------------------------------------------------------------


def spinor_source_terms(
    state: FieldState,
    st: WarpedSpacetime,
    ctx: ConnectionContext,
    coeffs: SliceCoefficients,
) -> SpinorSourceTerms:
    """□ψ の右辺を部分項ごとに評価する."""
    n = st.n
    s, a = coeffs.s, coeffs.a
    psi, chi, pi = state.psi, state.chi, state.pi
    geo = ctx.geometry
    cliff = coordinate_clifford(st, state.t)
    h_inv = np.array([-(s**2)] + [a**-2] * st.d)

    scalar_curvature = -0.25 * coeffs.scal * psi

    # u_α = h^{αα}dφ(∂_α)
    velocities = [pi] + [ctx.dphi[..., i, :] for i in range(st.d)]
    U = np.stack([h_inv[alpha] * v for alpha, v in enumerate(velocities)], axis=-2)
    W = np.einsum("...ijkl,...ak,...bl->...ijab", geo.R_up, U, U)
    pair = np.einsum("axy,byz->abxz", cliff, cliff)
    twist = -0.5 * np.einsum("...ijab,abxz,...jz->...ix", W, pair, psi, optimize=True)

    weight = coeffs.ns ** (2 - n)
    E = curvature_endomorphism(geo, psi)
    bil = spinor_bilinears(psi)
    nabla_psi = [chi] + [covariant_D_direction(psi, ctx, i, spinor=True) for i in range(st.d)]
    dlog = [coeffs.dlog_ns_t] + [coeffs.dlog_ns_x[..., i] for i in range(st.d)]

    grad_curvature = np.zeros_like(psi, dtype=complex)
    psi_derivative = np.zeros_like(psi, dtype=complex)
    lapse_derivative = np.zeros_like(psi, dtype=complex)
    Epsi = _apply_endomorphism(E, psi)
    for beta_idx in range(n):
        v = velocities[beta_idx]
        grad_r = np.einsum("...ip,...q,...qpjkl->...ijkl", geo.Ginv, v, geo.gradR)
        dE_geom = np.einsum("...ijkl,...jl->...ik", grad_r, bil)
        nab = nabla_psi[beta_idx]
        dE_psi = curvature_endomorphism(geo, nab, psi) + curvature_endomorphism(geo, psi, nab)
        factor = h_inv[beta_idx] * weight
        grad_curvature = grad_curvature + factor[..., None, None] * _spin(
            cliff[beta_idx], _apply_endomorphism(dE_geom, psi)
        )
        psi_derivative = psi_derivative + factor[..., None, None] * _spin(
            cliff[beta_idx], _apply_endomorphism(dE_psi, psi)
        )
        lapse_derivative = lapse_derivative + ((2 - n) * factor * dlog[beta_idx])[..., None, None] * _spin(
            cliff[beta_idx], Epsi
        )
    scale = -1j / 3.0
    quartic = -(1.0 / 9.0) * (weight**2)[..., None, None] * _apply_endomorphism(E, Epsi)
    return SpinorSourceTerms(
        scalar_curvature=scalar_curvature,
        twist=twist,
        grad_curvature=scale * grad_curvature,
        psi_derivative=scale * psi_derivative,
        lapse_derivative=scale * lapse_derivative,
        quartic=quartic,
    )


def rhs_spinor(
    state: FieldState,
    st: WarpedSpacetime,
    chart: TargetChart,
    grid: Grid,
    *,
    ctx: ConnectionContext | None = None,
    coeffs: SliceCoefficients | None = None,
) -> ComplexArray:
    """∇²_tψ = s⁻²[RHS − sṡχ − ½s² tr ġ χ − D*Dψ]."""
    if not (np.any(state.psi) or np.any(state.chi)):
        return np.zeros_like(state.psi)
    if ctx is None:
        ctx = connection_context(st, chart, grid, state.phi, state.t)
    if coeffs is None:
        coeffs = slice_coefficients(st, grid, state.t)
    s = coeffs.s
    chi = state.chi
    source = spinor_source_terms(state, st, ctx, coeffs).total()
    box_rest = -s * coeffs.sd * chi - 0.5 * s**2 * coeffs.tr_gdot * chi - rough_laplacian(state.psi, ctx, spinor=True)
    return (source + box_rest) / s**2


def evolution_rhs(state: FieldState, st: WarpedSpacetime, chart: TargetChart, grid: Grid) -> RhsOutput:
    """写像とスピノルの最高階時間微分を同じ接続データで評価する."""
    ctx = connection_context(st, chart, grid, state.phi, state.t)
    coeffs = slice_coefficients(st, grid, state.t)
    return RhsOutput(
        d2phi=rhs_map(state, st, chart, grid, ctx=ctx, coeffs=coeffs),
        d2psi=rhs_spinor(state, st, chart, grid, ctx=ctx, coeffs=coeffs),
    )


# ---- Dirac 拘束 -------------------------------------------------------------------------


def dirac_compatible_chi(
    phi: FloatArray,
    pi: FloatArray,
    psi: ComplexArray,
    st: WarpedSpacetime,
    chart: TargetChart,
    grid: Grid,
    t: float,
) -> ComplexArray:
    """iD̸ψ = ⅓(Ns)^{2−n}R^P(ψ,ψ)ψ を満たす時間スロット χ = s⁻¹γ_0(S + iR) を返す.

    S は D̸ の空間部分、R は拘束の右辺。π は時間スロットに現れないため参照しない。
    """
    del pi
    ctx = connection_context(st, chart, grid, phi, t)
    coeffs = slice_coefficients(st, grid, t)
    spatial = spatial_dirac(psi, ctx)
    source = dirac_source(psi, ctx.geometry, coeffs, st.n)
    return _spin(GAMMA[0], spatial + 1j * source) / coeffs.s


def dirac_residual(state: FieldState, st: WarpedSpacetime, chart: TargetChart, grid: Grid) -> float:
    """‖iD̸ψ − ⅓(Ns)^{2−n}R^P(ψ,ψ)ψ‖_{L²} / (‖ψ‖_{H¹} + floor)."""
    if not np.any(state.psi):
        return 0.0
    ctx = connection_context(st, chart, grid, state.phi, state.t)
    coeffs = slice_coefficients(st, grid, state.t)
    slot = -coeffs.s * _spin(GAMMA[0], state.chi) + spatial_dirac(state.psi, ctx)
    residual = 1j * slot - dirac_source(state.psi, ctx.geometry, coeffs, st.n)
    num = np.sqrt(l2_integral(pointwise_norm2(residual, ctx, n_slots=0, spinor=True), grid, ctx.a))
    den = np.sqrt(sobolev_norm2(state.psi, ctx, 1, spinor=True))
    return float(num / (den + RESIDUAL_FLOOR))


# ---- 時間積分 -----------------------------------------------------------------------


def stable_dt(st: WarpedSpacetime, grid: Grid, t: float, cfl: float, dt_max: float) -> float:
    """dt = min(cfl·s·a·Δx, dt_max)（座標波速 1/(s·a)）."""
    limit = cfl * st.s_jet(t).value * st.a_jet(t).value * grid.dx
    return float(min(limit, dt_max))


def _frozen(array: NDArray) -> NDArray:
    array.setflags(write=False)
    return array


def _derivative(state: FieldState, st: WarpedSpacetime, chart: TargetChart, grid: Grid) -> tuple[NDArray, ...]:
    ctx = connection_context(st, chart, grid, state.phi, state.t)
    coeffs = slice_coefficients(st, grid, state.t)
    d2phi = rhs_map(state, st, chart, grid, ctx=ctx, coeffs=coeffs)
    d2psi = rhs_spinor(state, st, chart, grid, ctx=ctx, coeffs=coeffs)
    A_t = _time_connection(ctx.geometry, state.pi)
    dpsi = state.chi - _apply_endomorphism(A_t, state.psi)
    dchi = d2psi - _apply_endomorphism(A_t, state.chi)
    return state.pi, d2phi, dpsi, dchi


def _shifted(state: FieldState, derivs: tuple[NDArray, ...], h: float) -> FieldState:
    return FieldState(
        phi=state.phi + h * derivs[0],
        pi=state.pi + h * derivs[1],
        psi=state.psi + h * derivs[2],
        chi=state.chi + h * derivs[3],
        t=state.t + h,
    )


def step_rk4(
    state: FieldState,
    st: WarpedSpacetime,
    chart: TargetChart,
    grid: Grid,
    dt: float,
    *,
    cfl: float | None = None,
) -> FieldState:
    """古典的 4 段 RK4 による 1 ステップ.

    Args:
        cfl: 与えられた場合 dt ≤ cfl·s·a·Δx を検査する。

    Raises:
        CFLViolationError: dt が CFL 上限を超えた。
        NumericalAbortError: 結果に NaN/Inf が含まれる。
        ChartExitError: φ がチャート外に出た。
    """
    if dt <= 0.0:
        raise ContractError("Time step must be positive", context={"dt": dt})
    if cfl is not None:
        limit = cfl * st.s_jet(state.t).value * st.a_jet(state.t).value * grid.dx
        if dt > limit * (1.0 + CFL_SLACK):
            raise CFLViolationError("Time step exceeds the CFL limit", context={"dt": dt, "limit": limit, "t": state.t})

    k1 = _derivative(state, st, chart, grid)
    k2 = _derivative(_shifted(state, k1, 0.5 * dt), st, chart, grid)
    k3 = _derivative(_shifted(state, k2, 0.5 * dt), st, chart, grid)
    k4 = _derivative(_shifted(state, k3, dt), st, chart, grid)
    combined = tuple((a + 2.0 * b + 2.0 * c + d) / 6.0 for a, b, c, d in zip(k1, k2, k3, k4, strict=True))
    new = _shifted(state, combined, dt)
    new = FieldState(
        phi=_frozen(new.phi),
        pi=_frozen(new.pi),
        psi=_frozen(new.psi),
        chi=_frozen(new.chi),
        t=state.t + dt,
    )
    if not new.is_finite():
        raise NumericalAbortError("Non-finite values in the evolved state", context={"t": new.t})
    check_chart(chart, new.phi)
    return new


Monitor = Callable[[FieldState, int], None]


class Integrator:
    """単一の状態を所有し、CFL 制御付きで時間発展させる.

    Notes:
        - モニタには受理済みステップごとに読み取り専用のスナップショットが渡される
        - 最終ステップは t_end にちょうど一致するよう切り詰める
    """

    def __init__(
        self,
        state: FieldState,
        st: WarpedSpacetime,
        chart: TargetChart,
        grid: Grid,
        *,
        cfl: float,
        dt_max: float,
    ) -> None:
        self._state = state
        self._st = st
        self._chart = chart
        self._grid = grid
        self._cfl = cfl
        self._dt_max = dt_max
        self._steps = 0

    @property
    def state(self) -> FieldState:
        return self._state

    @property
    def steps(self) -> int:
        return self._steps

    def advance(self, t_end: float) -> FieldState:
        """1 ステップ進める（t_end を超えない）."""
        dt = stable_dt(self._st, self._grid, self._state.t, self._cfl, self._dt_max)
        dt = min(dt, t_end - self._state.t)
        self._state = step_rk4(self._state, self._st, self._chart, self._grid, dt, cfl=self._cfl)
        self._steps += 1
        return self._state

    def run(self, t_end: float, monitor: Monitor | None = None) -> FieldState:
        """t_end まで積分する（異常終了時は例外をそのまま送出する）."""
        if monitor is not None:
            monitor(self._state, self._steps)
        # 丸めで残る極小ステップを作らない
        while t_end - self._state.t > 1e-12 * max(1.0, abs(t_end)):
            self.advance(t_end)
            if monitor is not None:
                monitor(self._state, self._steps)
        return self._state


# ---- 初期データ -----------------------------------------------------------------------


def _random_fourier(rng: np.random.Generator, grid: Grid, cutoff: int, components: int) -> FloatArray:
    """|k|_∞ ≤ cutoff の切断 Fourier 級数（平均 0）."""
    coords = grid.coords()
    out = np.zeros(grid.shape + (components,))
    ranges = [range(-cutoff, cutoff + 1)] * grid.d
    for k in np.array(np.meshgrid(*ranges, indexing="ij")).reshape(grid.d, -1).T:
        if not np.any(k):
            continue
        phase = sum(int(k[i]) * coords[i] for i in range(grid.d))
        weight = 1.0 / (1.0 + float(np.dot(k, k)))
        cos_c, sin_c = rng.standard_normal((2, components)) * weight
        out = out + np.cos(phase)[..., None] * cos_c + np.sin(phase)[..., None] * sin_c
    return out


def initial_norm_triple(
    phi: FloatArray,
    pi: FloatArray,
    psi: ComplexArray,
    base: FloatArray,
    st: WarpedSpacetime,
    chart: TargetChart,
    grid: Grid,
    t: float,
) -> float:
    """‖φ−y₀‖_{H^{r+1}} + ‖π‖_{H^r} + ‖ψ‖_{H^r}（共変 D による離散ノルム）."""
    r = regularity_index(st.n)
    ctx = connection_context(st, chart, grid, phi, t)
    offset = phi - base
    phi_norm2 = l2_integral(pointwise_norm2(offset, ctx, n_slots=0), grid, ctx.a) + sobolev_norm2(ctx.dphi, ctx, r)
    return float(
        np.sqrt(phi_norm2) + np.sqrt(sobolev_norm2(pi, ctx, r)) + np.sqrt(sobolev_norm2(psi, ctx, r, spinor=True))
    )


def make_initial_data(
    st: WarpedSpacetime,
    chart: TargetChart,
    grid: Grid,
    *,
    epsilon: float,
    seed: int,
    mode_cutoff: int,
    spinor: bool = True,
    t0: float = 0.0,
) -> FieldState:
    """ノルム三つ組がちょうど ε/2 となる乱数 Fourier 初期データ（χ は Dirac 整合）.

    Raises:
        ContractError: ε < 0。
        ChartExitError: 正規化の探索中に φ がチャート外に出た。
    """
    if epsilon < 0.0:
        raise ContractError("Initial-data amplitude must be non-negative", context={"epsilon": epsilon})
    m = chart.dim
    base = chart.base_point()
    rng = np.random.default_rng(seed)
    phi_dir = _random_fourier(rng, grid, mode_cutoff, m)
    pi_dir = _random_fourier(rng, grid, mode_cutoff, m)
    if spinor:
        psi_dir = _random_fourier(rng, grid, mode_cutoff, 2 * m) + 1j * _random_fourier(rng, grid, mode_cutoff, 2 * m)
        psi_dir = psi_dir.reshape(grid.shape + (m, 2))
    else:
        psi_dir = np.zeros(grid.shape + (m, 2), dtype=complex)
    base_field = np.broadcast_to(base, grid.shape + (m,)).copy()

    def build(lam: float) -> FieldState:
        phi = base_field + lam * phi_dir
        pi = lam * pi_dir
        psi = lam * psi_dir
        chi = dirac_compatible_chi(phi, pi, psi, st, chart, grid, t0)
        return FieldState(phi=phi, pi=pi, psi=psi, chi=chi, t=t0)

    if epsilon == 0.0:
        return build(0.0)

    target = 0.5 * epsilon

    def mismatch(lam: float) -> float:
        return initial_norm_triple(base_field + lam * phi_dir, lam * pi_dir, lam * psi_dir, base, st, chart, grid, t0) - target

    # 小振幅では三つ組は λ にほぼ比例する
    probe = 1e-8
    slope = (mismatch(probe) + target) / probe
    if not slope > 0.0:
        raise ContractError("Random initial-data direction has zero norm", context={"seed": seed})
    hi = 1.5 * target / slope
    for _ in range(60):
        if mismatch(hi) >= 0.0:
            break
        hi *= 2.0
    else:
        raise ContractError("Could not bracket the initial-data normalization", context={"epsilon": epsilon})
    lam = brentq(mismatch, 0.0, hi, xtol=1e-300, rtol=4.0 * np.finfo(float).eps, maxiter=200)
    logger.info("initial data: epsilon=%g seed=%d scale=%.6e", epsilon, seed, lam)
    return build(float(lam))
