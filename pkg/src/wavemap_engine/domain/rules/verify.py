"""Rules: randomized certification of the structural identities behind the evolution system.

設計意図:
- 時間微分は解析的テスト族（t の閉形式で与えた場）を数スライスで評価して差分する。積分器は使わない。
- 空間離散化が誤差を支配するチェックは格子倍化で収束次数（slope）を測る。
  合格条件は「残差 ≤ EXACT_TOLERANCE」または「slope ≥ 差分次数 − SLOPE_SLACK」。
- 微分階数は k ≤ 1 のみ扱う。
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import partial

import numpy as np
from numpy.typing import NDArray

from wavemap_engine.contract.errors import ContractError
from wavemap_engine.contract.schemas.reports import CheckResult
from wavemap_engine.contract.schemas.scenario import LapseSpec, ProfileFamily, ProfileSpec, TargetKind
from wavemap_engine.domain.rules.dynamics import (
    SliceCoefficients,
    dirac_source,
    rhs_map,
    slice_coefficients,
    spinor_bilinears,
    spinor_source_terms,
)
from wavemap_engine.domain.rules.fields import (
    ConnectionContext,
    FieldState,
    Grid,
    apply_target_endomorphism,
    covariant_D,
    covariant_D_power,
    fd_partial,
    l2_integral,
    map_differential,
    map_rough_laplacian,
    pointwise_inner,
    pointwise_norm2,
    rough_laplacian,
)
from wavemap_engine.domain.rules.geometry import WarpedSpacetime, christoffels, metric_components
from wavemap_engine.domain.rules.spin import (
    BETA,
    RescaleDirection,
    conformal_rescale,
    connection_context,
    dirac_apply,
    dirac_conformal,
    spatial_dirac,
    spinor_curvature,
)
from wavemap_engine.domain.rules.target import TargetChart, metric_derivative, target_geometry

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]

EXACT_TOLERANCE = 1e-10
VARIATION_TOLERANCE = 1e-6
SLOPE_SLACK = 0.2
TIME_STEP = 1e-3
PRODUCT_RULE_STEP = 1e-2
VARIATION_STEP = 1e-3
VARIATION_DT = 0.05
DEFAULT_DIRECTIONS = 200
JOINT_DIRECTIONS = 6
JOINT_ORDER = 2
CHECK_TIME = 0.3
NORM_FLOOR = 1e-300


class Background(str, Enum):
    """検証用の背景時空.

    Notes:
        - STATIC: s ≡ 1, a ≡ 1
        - DE_SITTER: s = e^t, a ≡ 1
        - OSCILLATING: s = e^{t/2}, a = 1 + 0.1 sin t
    """

    STATIC = "static"
    DE_SITTER = "de_sitter"
    OSCILLATING = "oscillating"


class ConformalFactor(str, Enum):
    """共形共変性チェックの因子 Ns."""

    ONE = "one"
    CONST = "const"
    COS = "cos"
    WAVE = "wave"


class CommutatorKind(str, Enum):
    """交換子恒等式の種類."""

    TIME_MAP_K0 = "time_map_k0"
    TIME_MAP_K1 = "time_map_k1"
    TIME_SPINOR_K0 = "time_spinor_k0"
    LAPLACE_MAP = "laplace_map"
    LAPLACE_SPINOR = "laplace_spinor"


def background_spacetime(kind: Background | str, n: int, lapse: LapseSpec | None = None) -> WarpedSpacetime:
    """検証用背景を構築する."""
    kind = Background(kind)
    const = ProfileSpec(family=ProfileFamily.CONST)
    match kind:
        case Background.STATIC:
            s, a = const, const
        case Background.DE_SITTER:
            s, a = ProfileSpec(family=ProfileFamily.EXP, rate=1.0), const
        case Background.OSCILLATING:
            s = ProfileSpec(family=ProfileFamily.EXP, rate=0.5)
            a = ProfileSpec(family=ProfileFamily.OSC, mu=0.1, omega=1.0)
    return WarpedSpacetime(n=n, s=s, a=a, lapse=lapse or LapseSpec())


def _chart(kind: TargetKind | str) -> TargetChart:
    return TargetChart(kind=TargetKind(kind), dim=2)


# ---- 解析的テスト族 ------------------------------------------------------------------


@dataclass(frozen=True, slots=True, eq=False)
class AnalyticFamily:
    """t の閉形式で与えた φ, ベクトル場, スピノル場.

    各成分は Σ_M amp·cos(k_M·x − ω_M t + θ_M)（スピノルは複素指数）で、波数は {−1,0,1}^d。

    Attributes:
        grid: 評価格子
        base: φ の基点
        wavevectors: (M, d)
        omega: (M,)
        phase: (M,)
        phi_amp: (M, m)
        vector_amp: (2, M, m)
        psi_amp: (2, M, m, 2) 複素
    """

    grid: Grid
    base: FloatArray
    wavevectors: FloatArray
    omega: FloatArray
    phase: FloatArray
    phi_amp: FloatArray
    vector_amp: FloatArray
    psi_amp: ComplexArray

    def _angle(self, t: float) -> FloatArray:
        x = np.stack(self.grid.coords(), axis=-1)
        return x @ self.wavevectors.T - self.omega * t + self.phase

    def phi(self, t: float) -> FloatArray:
        return self.base + np.cos(self._angle(t)) @ self.phi_amp

    def phi_dot(self, t: float) -> FloatArray:
        return (self.omega * np.sin(self._angle(t))) @ self.phi_amp

    def vector(self, t: float, which: int = 0) -> FloatArray:
        return np.cos(self._angle(t)) @ self.vector_amp[which]

    def psi(self, t: float, which: int = 0) -> ComplexArray:
        return np.einsum("...M,Mmc->...mc", np.exp(1j * self._angle(t)), self.psi_amp[which])

    def psi_dot(self, t: float, which: int = 0) -> ComplexArray:
        return np.einsum("...M,Mmc->...mc", -1j * self.omega * np.exp(1j * self._angle(t)), self.psi_amp[which])


def analytic_family(
    grid: Grid,
    chart: TargetChart,
    seed: int,
    *,
    amplitude: float = 0.2,
    spinor_amplitude: float = 0.5,
    modes: int = 3,
    static: bool = False,
) -> AnalyticFamily:
    """seed から決定的に解析的テスト族を生成する.

    Args:
        grid: 評価格子。
        chart: ターゲットチャート（基点と次元）。
        seed: 乱数シード。
        amplitude: φ − y₀ の振幅。
        spinor_amplitude: ψ の振幅。
        modes: モード数。
        static: True なら ω = 0（時間非依存）。
    """
    rng = np.random.default_rng(seed)
    m = chart.dim
    wavevectors = np.zeros((modes, grid.d))
    for row in range(modes):
        while not np.any(wavevectors[row]):
            wavevectors[row] = rng.integers(-1, 2, size=grid.d)
    omega = np.zeros(modes) if static else rng.uniform(0.5, 1.5, size=modes)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=modes)
    scale = 1.0 / modes
    phi_amp = amplitude * scale * rng.uniform(-1.0, 1.0, size=(modes, m))
    vector_amp = scale * rng.uniform(-1.0, 1.0, size=(2, modes, m))
    psi_amp = spinor_amplitude * scale * (
        rng.uniform(-1.0, 1.0, size=(2, modes, m, 2)) + 1j * rng.uniform(-1.0, 1.0, size=(2, modes, m, 2))
    )
    return AnalyticFamily(
        grid=grid,
        base=chart.base_point(),
        wavevectors=wavevectors,
        omega=omega,
        phase=phase,
        phi_amp=phi_amp,
        vector_amp=vector_amp,
        psi_amp=psi_amp,
    )


@dataclass(frozen=True, slots=True)
class _Slice:
    state: FieldState
    ctx: ConnectionContext
    coeffs: SliceCoefficients
    time_connection: FloatArray


def _slice(family: AnalyticFamily, st: WarpedSpacetime, chart: TargetChart, t: float, which: int = 0) -> _Slice:
    """時刻 t の場と接続データ（χ = ∂_tψ + Γ(π)ψ）."""
    grid = family.grid
    phi = family.phi(t)
    pi = family.phi_dot(t)
    ctx = connection_context(st, chart, grid, phi, t)
    gamma_pi = np.einsum("...ijk,...j->...ik", ctx.geometry.Gamma, pi)
    psi = family.psi(t, which)
    chi = family.psi_dot(t, which) + apply_target_endomorphism(gamma_pi, psi, grid, True)
    state = FieldState(phi=phi, pi=pi, psi=psi, chi=chi, t=t)
    return _Slice(state=state, ctx=ctx, coeffs=slice_coefficients(st, grid, t), time_connection=gamma_pi)


# ---- 数値ヘルパ ---------------------------------------------------------------------


def time_derivative(fn: Callable[[float], NDArray], t: float, step: float = TIME_STEP, *, order: int = 4) -> NDArray:
    """中心差分による d/dt（order 4 は 5 点、order 2 は 3 点）."""
    if order == 4:
        return (fn(t - 2.0 * step) - 8.0 * fn(t - step) + 8.0 * fn(t + step) - fn(t + 2.0 * step)) / (12.0 * step)
    if order == 2:
        return (fn(t + step) - fn(t - step)) / (2.0 * step)
    raise ContractError("Time stencil order must be 2 or 4", context={"order": order})


def _epsilon_derivative(fn: Callable[[float], float], step: float) -> float:
    """5 点 ε ステンシル（4 次以下の多項式で厳密）."""
    return (fn(-2.0 * step) - 8.0 * fn(-step) + 8.0 * fn(step) - fn(2.0 * step)) / (12.0 * step)


def _slot_correction(field: NDArray, gamma_j_i0: FloatArray, grid_d: int, n_slots: int) -> NDArray:
    """Σ_slots Γ^j_{i0} ξ(…, ∂_j, …)（∇_t のスロット項、符号は呼び出し側）."""
    total = np.zeros_like(field)
    for slot in range(n_slots):
        axis = grid_d + slot
        contracted = np.tensordot(field, gamma_j_i0, axes=([axis], [0]))
        total = total + np.moveaxis(contracted, -1, axis)
    return total


def _metric_rate(st: WarpedSpacetime, t: float) -> FloatArray:
    """g⁻¹ġ（[k, i] 成分 (ġ(∂_i))^k）を計量成分の時間差分から求める."""
    d = st.d
    g = metric_components(st, t)[1:, 1:]
    gdot = time_derivative(lambda tt: metric_components(st, tt)[1:, 1:], t)
    return np.linalg.solve(g, gdot).reshape(d, d)


def _l2(field: NDArray, ctx: ConnectionContext, *, n_slots: int, spinor: bool) -> float:
    return math.sqrt(l2_integral(pointwise_norm2(field, ctx, n_slots=n_slots, spinor=spinor), ctx.grid, ctx.a))


def _relative(diff: NDArray, ctx: ConnectionContext, *refs: NDArray, n_slots: int = 0, spinor: bool = False) -> float:
    """‖diff‖ / Σ‖refs‖（L²、g_t と G(φ)）."""
    scale = sum(_l2(r, ctx, n_slots=n_slots, spinor=spinor) for r in refs)
    return _l2(diff, ctx, n_slots=n_slots, spinor=spinor) / max(scale, NORM_FLOOR)


def _slope(coarse: float, fine: float) -> float | None:
    if coarse > 0.0 and fine > 0.0:
        value = math.log2(coarse / fine)
        return value if math.isfinite(value) else None
    return None


def _grid_refinement(
    check_id: str,
    residual_at: Callable[[Grid], float],
    grid: Grid,
    *,
    detail: str = "",
) -> CheckResult:
    """格子倍化で残差と収束次数を測る."""
    coarse = residual_at(grid)
    fine = residual_at(grid.refined())
    slope = _slope(coarse, fine)
    passed = fine <= EXACT_TOLERANCE or (slope is not None and slope >= grid.fd_order - SLOPE_SLACK)
    logger.debug("check %s: coarse=%.3e fine=%.3e slope=%s", check_id, coarse, fine, slope)
    return CheckResult(
        check_id=check_id,
        residual=fine,
        slope=slope,
        tolerance=EXACT_TOLERANCE,
        passed=bool(passed),
        detail=detail,
    )


# ---- Weitzenböck ------------------------------------------------------------------


def weitzenboeck_residual(
    grid: Grid,
    st: WarpedSpacetime,
    chart: TargetChart,
    *,
    seed: int = 0,
    twisted: bool = True,
    t: float = CHECK_TIME,
) -> float:
    """‖D̸²ψ − (□ψ + scal/4·ψ + twist)‖ / ‖D̸²ψ‖."""
    family = analytic_family(grid, chart, seed)
    here = _slice(family, st, chart, t)
    s, sd = here.coeffs.s, here.coeffs.sd

    def dirac_at(tt: float) -> ComplexArray:
        sl = _slice(family, st, chart, tt)
        return dirac_apply(sl.state.psi, sl.state.chi, sl.ctx, st, tt)

    eta = dirac_at(t)
    nabla_t_eta = time_derivative(dirac_at, t) + apply_target_endomorphism(here.time_connection, eta, grid, True)
    lhs = dirac_apply(eta, nabla_t_eta, here.ctx, st, t)

    chi = here.state.chi
    nabla_t_chi = time_derivative(lambda tt: _slice(family, st, chart, tt).state.chi, t)
    nabla_t_chi = nabla_t_chi + apply_target_endomorphism(here.time_connection, chi, grid, True)
    box = (
        s**2 * nabla_t_chi
        + s * sd * chi
        + 0.5 * s**2 * here.coeffs.tr_gdot * chi
        + rough_laplacian(here.state.psi, here.ctx, spinor=True)
    )
    terms = spinor_source_terms(here.state, st, here.ctx, here.coeffs)
    rhs = box - terms.scalar_curvature
    if twisted:
        rhs = rhs - terms.twist
    return _relative(lhs - rhs, here.ctx, lhs, spinor=True)


def check_weitzenboeck(
    *,
    n: int = 2,
    background: Background | str = Background.OSCILLATING,
    target: TargetKind | str = TargetKind.SPHERE,
    twisted: bool = True,
    seed: int = 0,
    npts: int = 32,
    fd_order: int = 4,
) -> CheckResult:
    """D̸² = □ + scal/4 + twist を格子倍化で確認する（twisted=False は曲率項の除去）."""
    st = background_spacetime(background, n)
    chart = _chart(target)
    grid = Grid(d=n - 1, npts=npts, fd_order=fd_order)
    label = "weitzenboeck" if twisted else "weitzenboeck_untwisted"
    return _grid_refinement(
        f"{label}[n={n},{Background(background).value},{TargetKind(target).value},p={fd_order}]",
        lambda g: weitzenboeck_residual(g, st, chart, seed=seed, twisted=twisted),
        grid,
        detail="D^2 psi vs box psi + scal/4 psi" + (" + twist" if twisted else ""),
    )


# ---- 共形共変性 ---------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class _Factor:
    value: FloatArray
    dt: FloatArray
    dx: FloatArray


def _conformal_factor(kind: ConformalFactor, grid: Grid, t: float) -> _Factor:
    x1 = grid.coords()[0]
    zero = np.zeros(grid.shape)
    dx = np.zeros(grid.shape + (grid.d,))
    match kind:
        case ConformalFactor.ONE:
            return _Factor(np.ones(grid.shape), zero, dx)
        case ConformalFactor.CONST:
            return _Factor(np.full(grid.shape, 2.5), zero, dx)
        case ConformalFactor.COS:
            dx[..., 0] = -0.3 * np.sin(x1)
            return _Factor(1.0 + 0.3 * np.cos(x1), zero, dx)
        case ConformalFactor.WAVE:
            dx[..., 0] = -0.3 * np.sin(x1 - t)
            return _Factor(1.0 + 0.3 * np.cos(x1 - t), 0.3 * np.sin(x1 - t), dx)
    raise ContractError(f"Unknown conformal factor: {kind}")


def conformal_residual(
    grid: Grid,
    st: WarpedSpacetime,
    chart: TargetChart,
    factor: ConformalFactor | str,
    *,
    seed: int = 0,
    t: float = CHECK_TIME,
) -> float:
    """D̸̄(F^{−(n−1)/2}ψ) と F^{−(n+1)/2}D̸ψ の相対 L² 差（D̸̄ は F²h の Dirac 作用素）."""
    n = st.n
    family = analytic_family(grid, chart, seed)
    here = _slice(family, st, chart, t)
    f = _conformal_factor(ConformalFactor(factor), grid, t)
    psi, chi = here.state.psi, here.state.chi

    exponent = 0.5 * (1 - n)
    rescaled = conformal_rescale(psi, f.value, n, RescaleDirection.TO_CONFORMAL)
    weight_dt = exponent * f.value ** (exponent - 1.0) * f.dt
    rescaled_chi = conformal_rescale(chi, f.value, n, RescaleDirection.TO_CONFORMAL) + weight_dt[..., None, None] * psi

    u = np.log(f.value)
    lhs = dirac_conformal(rescaled, rescaled_chi, here.ctx, st, t, u, f.dt / f.value, f.dx / f.value[..., None])
    rhs = (f.value ** (-0.5 * (n + 1)))[..., None, None] * dirac_apply(psi, chi, here.ctx, st, t)
    return _relative(lhs - rhs, here.ctx, rhs, spinor=True)


def check_conformal_covariance(
    *,
    n: int = 2,
    background: Background | str = Background.OSCILLATING,
    factor: ConformalFactor | str = ConformalFactor.COS,
    target: TargetKind | str = TargetKind.SPHERE,
    seed: int = 0,
    npts: int = 32,
    fd_order: int = 4,
) -> CheckResult:
    """Dirac 作用素の共形共変性を格子倍化で確認する."""
    st = background_spacetime(background, n)
    chart = _chart(target)
    grid = Grid(d=n - 1, npts=npts, fd_order=fd_order)
    factor = ConformalFactor(factor)
    return _grid_refinement(
        f"conformal_covariance[n={n},{Background(background).value},Ns={factor.value}]",
        lambda g: conformal_residual(g, st, chart, factor, seed=seed),
        grid,
        detail="Dbar(F^{-(n-1)/2} psi) vs F^{-(n+1)/2} D psi",
    )


# ---- 交換子 ---------------------------------------------------------------------


def _curvature_apply(R_up: FloatArray, X: NDArray, Y: NDArray, Z: NDArray) -> NDArray:
    """R^P(X, Y)Z（X, Y, Z は (*grid, m)）."""
    return np.einsum("...abcd,...c,...d,...b->...a", R_up, X, Y, Z)


def _time_commutator_map(
    family: AnalyticFamily, st: WarpedSpacetime, chart: TargetChart, t: float, k: int
) -> tuple[NDArray, NDArray, NDArray, ConnectionContext]:
    """[∇_t, D] を φ (k=0) または Dφ (k=1) に作用させた左辺と右辺."""
    grid = family.grid
    d = grid.d
    here = _slice(family, st, chart, t)
    ctx = here.ctx
    A_t = here.time_connection
    gamma_j_i0 = christoffels(st, t).gamma_j_i0
    rate = _metric_rate(st, t)
    R_up = ctx.geometry.R_up

    if k == 0:

        def dphi_at(tt: float) -> FloatArray:
            return map_differential(family.phi(tt), grid)

        dphi = ctx.dphi
        nabla_t_dphi = (
            time_derivative(dphi_at, t)
            + apply_target_endomorphism(A_t, dphi, grid, False)
            - _slot_correction(dphi, gamma_j_i0, d, 1)
        )
        lhs = nabla_t_dphi - covariant_D(here.state.pi, ctx)
        rhs = -0.5 * np.einsum("ki,...km->...im", rate, dphi)
        return lhs, rhs, nabla_t_dphi, ctx

    if k == 1:

        def hessian_at(tt: float) -> FloatArray:
            sl = _slice(family, st, chart, tt)
            return covariant_D(sl.ctx.dphi, sl.ctx)

        def dphi_at(tt: float) -> FloatArray:
            return map_differential(family.phi(tt), grid)

        xi = ctx.dphi
        hessian = covariant_D(xi, ctx)
        nabla_t_hessian = (
            time_derivative(hessian_at, t)
            + apply_target_endomorphism(A_t, hessian, grid, False)
            - _slot_correction(hessian, gamma_j_i0, d, 2)
        )
        nabla_t_xi = (
            time_derivative(dphi_at, t)
            + apply_target_endomorphism(A_t, xi, grid, False)
            - _slot_correction(xi, gamma_j_i0, d, 1)
        )
        lhs = nabla_t_hessian - covariant_D(nabla_t_xi, ctx)
        rhs = np.einsum("...abcd,...c,...id,...jb->...ija", R_up, here.state.pi, xi, xi)
        rhs = rhs - 0.5 * np.einsum("ki,...kjm->...ijm", rate, hessian)
        return lhs, rhs, nabla_t_hessian, ctx

    raise ContractError("Commutator order must be 0 or 1", context={"k": k})


def _time_commutator_spinor(
    family: AnalyticFamily, st: WarpedSpacetime, chart: TargetChart, t: float
) -> tuple[NDArray, NDArray, NDArray, ConnectionContext]:
    """[∇_t, D]ψ = R^S(∂_t,·)ψ + R^P(π, dφ(·))ψ − ½D_{ġ(·)}ψ の両辺."""
    grid = family.grid
    d = grid.d
    here = _slice(family, st, chart, t)
    ctx = here.ctx

    def dpsi_at(tt: float) -> ComplexArray:
        sl = _slice(family, st, chart, tt)
        return covariant_D(sl.state.psi, sl.ctx, spinor=True)

    dpsi = covariant_D(here.state.psi, ctx, spinor=True)
    nabla_t_dpsi = (
        time_derivative(dpsi_at, t)
        + apply_target_endomorphism(here.time_connection, dpsi, grid, True)
        - _slot_correction(dpsi, christoffels(st, t).gamma_j_i0, d, 1)
    )
    lhs = nabla_t_dpsi - covariant_D(here.state.chi, ctx, spinor=True)

    spin_part = np.stack([spinor_curvature(st, t, 0, i + 1) for i in range(d)])
    target_part = np.einsum("...abcd,...c,...id->...iab", ctx.geometry.R_up, here.state.pi, ctx.dphi)
    psi = here.state.psi
    rhs = np.einsum("iab,...mb->...ima", spin_part, psi) + np.einsum("...iab,...bx->...iax", target_part, psi)
    rhs = rhs - 0.5 * np.einsum("ki,...kmx->...imx", _metric_rate(st, t), dpsi)
    return lhs, rhs, nabla_t_dpsi, ctx


def _laplace_commutator_map(
    family: AnalyticFamily, st: WarpedSpacetime, chart: TargetChart, t: float
) -> tuple[NDArray, NDArray, NDArray, ConnectionContext]:
    """[D*D, D]φ_j = a⁻² Σ_i R^P(∂_jφ, ∂_iφ)∂_iφ（平坦スライス）."""
    here = _slice(family, st, chart, t)
    ctx = here.ctx
    first = rough_laplacian(ctx.dphi, ctx)
    lhs = first - covariant_D(map_rough_laplacian(here.state.phi, ctx), ctx)
    rhs = np.einsum("...abcd,...jc,...id,...ib->...ja", ctx.geometry.R_up, ctx.dphi, ctx.dphi, ctx.dphi) / ctx.a**2
    return lhs, rhs, first, ctx


def _laplace_commutator_spinor(
    family: AnalyticFamily, st: WarpedSpacetime, chart: TargetChart, t: float
) -> tuple[NDArray, NDArray, NDArray, ConnectionContext]:
    """[D*D, D]ψ_j = a⁻² Σ_i [2F_ji D_iψ + (D_iF_ji)ψ]（F は S⊗φ*TP の曲率）."""
    here = _slice(family, st, chart, t)
    ctx = here.ctx
    geo = ctx.geometry
    psi = here.state.psi
    dphi = ctx.dphi
    omega = ctx.omega

    dpsi = covariant_D(psi, ctx, spinor=True)
    first = rough_laplacian(dpsi, ctx, spinor=True)
    lhs = first - covariant_D(rough_laplacian(psi, ctx, spinor=True), ctx, spinor=True)

    spin_F = np.einsum("jab,ibc->jiac", omega, omega) - np.einsum("iab,jbc->jiac", omega, omega)
    spin_DF = np.einsum("iab,jibc->jiac", omega, spin_F) - np.einsum("jiab,ibc->jiac", spin_F, omega)

    target_F = np.einsum("...abcd,...jc,...id->...jiab", geo.R_up, dphi, dphi)
    hessian = covariant_D(dphi, ctx)
    hessian_diag = np.einsum("...iim->...im", hessian)
    grad_r_up = np.einsum("...ap,...qpbcd->...qabcd", geo.Ginv, geo.gradR)
    target_DF = (
        np.einsum("...qabcd,...iq,...jc,...id->...jiab", grad_r_up, dphi, dphi, dphi)
        + np.einsum("...abcd,...ijc,...id->...jiab", geo.R_up, hessian, dphi)
        + np.einsum("...abcd,...jc,...id->...jiab", geo.R_up, dphi, hessian_diag)
    )

    rhs = 2.0 * np.einsum("jiab,...imb->...jma", spin_F, dpsi)
    rhs = rhs + 2.0 * np.einsum("...jiab,...ibx->...jax", target_F, dpsi)
    rhs = rhs + np.einsum("jiab,...mb->...jma", spin_DF, psi)
    rhs = rhs + np.einsum("...jiab,...bx->...jax", target_DF, psi)
    return lhs, rhs / ctx.a**2, first, ctx


def commutator_residual(
    grid: Grid,
    st: WarpedSpacetime,
    chart: TargetChart,
    kind: CommutatorKind | str,
    *,
    seed: int = 0,
    t: float = CHECK_TIME,
) -> float:
    """交換子恒等式の相対 L² 残差（尺度は左辺第 1 項と両辺のノルム和）."""
    kind = CommutatorKind(kind)
    family = analytic_family(grid, chart, seed)
    spinor = kind in (CommutatorKind.TIME_SPINOR_K0, CommutatorKind.LAPLACE_SPINOR)
    match kind:
        case CommutatorKind.TIME_MAP_K0:
            lhs, rhs, ref, ctx = _time_commutator_map(family, st, chart, t, 0)
            slots = 1
        case CommutatorKind.TIME_MAP_K1:
            lhs, rhs, ref, ctx = _time_commutator_map(family, st, chart, t, 1)
            slots = 2
        case CommutatorKind.TIME_SPINOR_K0:
            lhs, rhs, ref, ctx = _time_commutator_spinor(family, st, chart, t)
            slots = 1
        case CommutatorKind.LAPLACE_MAP:
            lhs, rhs, ref, ctx = _laplace_commutator_map(family, st, chart, t)
            slots = 1
        case CommutatorKind.LAPLACE_SPINOR:
            lhs, rhs, ref, ctx = _laplace_commutator_spinor(family, st, chart, t)
            slots = 1
    return _relative(lhs - rhs, ctx, lhs, rhs, ref, n_slots=slots, spinor=spinor)


def check_commutators(
    *,
    kind: CommutatorKind | str = CommutatorKind.TIME_MAP_K0,
    n: int = 2,
    background: Background | str = Background.OSCILLATING,
    target: TargetKind | str = TargetKind.SPHERE,
    seed: int = 0,
    npts: int = 32,
    fd_order: int = 4,
) -> CheckResult:
    """[∇_t, D] と [D*D, D] の恒等式を格子倍化で確認する."""
    kind = CommutatorKind(kind)
    st = background_spacetime(background, n)
    chart = _chart(target)
    grid = Grid(d=n - 1, npts=npts, fd_order=fd_order)
    return _grid_refinement(
        f"commutator_{kind.value}[n={n},{Background(background).value},{TargetKind(target).value}]",
        lambda g: commutator_residual(g, st, chart, kind, seed=seed),
        grid,
        detail=kind.value,
    )


# ---- 積の法則 ---------------------------------------------------------------------


def product_rule_residual(
    grid: Grid,
    st: WarpedSpacetime,
    chart: TargetChart,
    *,
    k: int,
    spinor: bool,
    step: float,
    seed: int = 0,
    static: bool = False,
    t: float = CHECK_TIME,
) -> float:
    """∂_t⟨D^kξ, D^kη⟩ − ⟨∇_tD^kξ, D^kη⟩ − ⟨D^kξ, ∇_tD^kη⟩ の L∞ 相対残差（2 次時間差分）."""
    if k not in (0, 1):
        raise ContractError("Product rule is checked for k <= 1", context={"k": k})
    family = analytic_family(grid, chart, seed, static=static)
    here = _slice(family, st, chart, t)
    gamma_j_i0 = christoffels(st, t).gamma_j_i0

    def field_at(tt: float, which: int) -> NDArray:
        sl = here if tt == t else _slice(family, st, chart, tt)
        raw = family.psi(tt, which) if spinor else family.vector(tt, which)
        return covariant_D_power(raw, sl.ctx, k, spinor=spinor)

    def inner_at(tt: float) -> FloatArray:
        sl = _slice(family, st, chart, tt)
        return np.real(pointwise_inner(field_at(tt, 0), field_at(tt, 1), sl.ctx, n_slots=k, spinor=spinor))

    def nabla_t(which: int) -> NDArray:
        value = field_at(t, which)
        out = time_derivative(lambda tt: field_at(tt, which), t, step, order=2)
        out = out + apply_target_endomorphism(here.time_connection, value, grid, spinor)
        return out - _slot_correction(value, gamma_j_i0, grid.d, k)

    xi, eta = field_at(t, 0), field_at(t, 1)
    lhs = time_derivative(inner_at, t, step, order=2)
    rhs = np.real(
        pointwise_inner(nabla_t(0), eta, here.ctx, n_slots=k, spinor=spinor)
        + pointwise_inner(xi, nabla_t(1), here.ctx, n_slots=k, spinor=spinor)
    )
    scale = max(float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))), NORM_FLOOR)
    return float(np.max(np.abs(lhs - rhs))) / scale


def check_product_rule(
    *,
    k: int = 0,
    spinor: bool = False,
    n: int = 2,
    background: Background | str = Background.OSCILLATING,
    target: TargetKind | str = TargetKind.SPHERE,
    seed: int = 0,
    npts: int = 32,
    step: float = PRODUCT_RULE_STEP,
) -> CheckResult:
    """積の法則を時間ステップ半減での収束次数（2 次）で確認する."""
    st = background_spacetime(background, n)
    chart = _chart(target)
    grid = Grid(d=n - 1, npts=npts)
    coarse = product_rule_residual(grid, st, chart, k=k, spinor=spinor, step=step, seed=seed)
    fine = product_rule_residual(grid, st, chart, k=k, spinor=spinor, step=0.5 * step, seed=seed)
    slope = _slope(coarse, fine)
    passed = fine <= EXACT_TOLERANCE or (slope is not None and slope >= 2 - SLOPE_SLACK)
    kind = "spinor" if spinor else "map"
    return CheckResult(
        check_id=f"product_rule_{kind}_k{k}[n={n},{Background(background).value},{TargetKind(target).value}]",
        residual=fine,
        slope=slope,
        tolerance=EXACT_TOLERANCE,
        passed=bool(passed),
        detail="L-infinity residual under time-step halving",
    )


# ---- 変分整合性 --------------------------------------------------------------------


def _map_weight(st: WarpedSpacetime, grid: Grid, t: float) -> FloatArray:
    """(Ns)^{n−2} s⁻¹ a^d Δx^d（作用の体積要素込みの重み）."""
    coeffs = slice_coefficients(st, grid, t)
    return coeffs.ns ** (st.n - 2) / coeffs.s * coeffs.a**grid.d * grid.dx**grid.d


def map_action(
    phi0: FloatArray,
    phi1: FloatArray,
    phi2: FloatArray,
    st: WarpedSpacetime,
    chart: TargetChart,
    grid: Grid,
    t1: float,
    dt: float,
) -> float:
    """ψ = 0 の離散作用 ½∫(Ns)^{n−2}|dφ|²_h dV_h（運動項は半ステップ、勾配項は中央スライス）."""
    total = 0.0
    for left, right, th in ((phi0, phi1, t1 - 0.5 * dt), (phi1, phi2, t1 + 0.5 * dt)):
        q = (right - left) / dt
        G = target_geometry(chart, 0.5 * (left + right)).G
        s = st.s_jet(th).value
        total -= 0.5 * dt * s**2 * float(np.sum(_map_weight(st, grid, th) * np.einsum("...ij,...i,...j->...", G, q, q)))
    a = st.a_jet(t1).value
    p = map_differential(phi1, grid)
    G1 = target_geometry(chart, phi1).G
    total += 0.5 * dt / a**2 * float(np.sum(_map_weight(st, grid, t1) * np.einsum("...ij,...ni,...nj->...", G1, p, p)))
    return total


def map_euler_lagrange(
    phi0: FloatArray,
    phi1: FloatArray,
    phi2: FloatArray,
    st: WarpedSpacetime,
    chart: TargetChart,
    grid: Grid,
    t1: float,
    dt: float,
) -> FloatArray:
    """map_action の φ1 に関する勾配（発散形の離散 Euler–Lagrange 残差）."""
    grad = np.zeros_like(phi1)
    for left, right, th, sign in ((phi0, phi1, t1 - 0.5 * dt, 1.0), (phi1, phi2, t1 + 0.5 * dt, -1.0)):
        q = (right - left) / dt
        geo = target_geometry(chart, 0.5 * (left + right))
        c = (st.s_jet(th).value ** 2 * _map_weight(st, grid, th))[..., None]
        half = 0.5 * np.einsum("...lij,...i,...j->...l", metric_derivative(geo), q, q)
        flux = (2.0 * sign / dt) * np.einsum("...lj,...j->...l", geo.G, q)
        grad -= 0.5 * dt * c * (half + flux)
    a = st.a_jet(t1).value
    p = map_differential(phi1, grid)
    geo1 = target_geometry(chart, phi1)
    w = (_map_weight(st, grid, t1) / a**2)[..., None]
    grad += 0.5 * dt * w * np.einsum("...lij,...ni,...nj->...l", metric_derivative(geo1), p, p)
    for i in range(grid.d):
        current = w * np.einsum("...lj,...j->...l", geo1.G, p[..., i, :])
        grad -= dt * fd_partial(current, i, grid)
    return grad


def spinor_action(
    psi0: ComplexArray,
    psi1: ComplexArray,
    psi2: ComplexArray,
    ctx: ConnectionContext,
    st: WarpedSpacetime,
    coeffs: SliceCoefficients,
    dt: float,
) -> float:
    """定数 φ、a ≡ const での離散スピノル作用 ½∫(⟨ψ, iD̸ψ⟩ − ⅙(Ns)^{2−n}⟨ψ, R^P(ψ,ψ)ψ⟩)dV_h."""
    grid = ctx.grid
    G = ctx.geometry.G
    volume = ctx.a**grid.d * grid.dx**grid.d

    def overlap(left: ComplexArray, right: ComplexArray) -> float:
        return float(np.sum(np.imag(np.einsum("...ij,...ic,...jc->...", G, np.conj(left), right))))

    time_part = 0.5 * volume * (overlap(psi1, psi2) + overlap(psi0, psi1))
    density = np.real(pointwise_inner(psi1, 1j * spatial_dirac(psi1, ctx), ctx, n_slots=0, spinor=True, beta=BETA))
    bil = spinor_bilinears(psi1)
    quartic = np.real(np.einsum("...ijkl,...ik,...jl->...", ctx.geometry.R, bil, bil))
    weight = coeffs.ns ** (2 - st.n)
    space_part = 0.5 * dt * volume / coeffs.s * float(np.sum(density - weight * quartic / 6.0))
    return time_part + space_part


def spinor_euler_lagrange(
    psi0: ComplexArray,
    psi1: ComplexArray,
    psi2: ComplexArray,
    ctx: ConnectionContext,
    st: WarpedSpacetime,
    coeffs: SliceCoefficients,
    t1: float,
    dt: float,
    *,
    coefficient: float = 1.0 / 3.0,
) -> ComplexArray:
    """iD̸ψ − coefficient·(Ns)^{2−n}R^P(ψ,ψ)ψ（時間スロットは中心差分）."""
    chi = (psi2 - psi0) / (2.0 * dt)
    source = dirac_source(psi1, ctx.geometry, coeffs, st.n, coefficient=coefficient)
    return 1j * dirac_apply(psi1, chi, ctx, st, t1) - source


def _mismatch(measured: float, predicted: float, scale: float) -> float:
    return abs(measured - predicted) / max(scale, NORM_FLOOR)


def variational_mismatch(
    st: WarpedSpacetime,
    chart: TargetChart,
    grid: Grid,
    *,
    seed: int = 0,
    directions: int = DEFAULT_DIRECTIONS,
    coefficient: float = 1.0 / 3.0,
    t1: float = CHECK_TIME,
    dt: float = VARIATION_DT,
) -> tuple[float, float]:
    """離散作用の方向微分と EL 残差の内積の最大相対差を (φ 変分, ψ 変分) で返す.

    相対差は |dS(v) − ⟨EL, v⟩| / (‖EL‖·‖v‖)。ψ 変分は定数 φ と a ≡ a(t1) の背景で行う。
    """
    rng = np.random.default_rng(seed + 1)
    family = analytic_family(grid, chart, seed)
    phi0, phi1, phi2 = (family.phi(t1 + offset * dt) for offset in (-1.0, 0.0, 1.0))
    map_el = map_euler_lagrange(phi0, phi1, phi2, st, chart, grid, t1, dt)
    worst_map = 0.0
    for _ in range(directions):
        v = rng.standard_normal(phi1.shape)
        measured = _epsilon_derivative(
            lambda e: map_action(phi0, phi1 + e * v, phi2, st, chart, grid, t1, dt), VARIATION_STEP
        )
        predicted = float(np.sum(map_el * v))
        worst_map = max(worst_map, _mismatch(measured, predicted, float(np.linalg.norm(map_el) * np.linalg.norm(v))))

    frozen = WarpedSpacetime(
        n=st.n, s=st.s, a=ProfileSpec(family=ProfileFamily.CONST, scale=st.a_jet(t1).value), lapse=st.lapse
    )
    m = chart.dim
    phi_const = np.broadcast_to(chart.base_point() + np.linspace(0.3, -0.2, m), grid.shape + (m,)).copy()
    ctx = connection_context(frozen, chart, grid, phi_const, t1)
    coeffs = slice_coefficients(frozen, grid, t1)
    spinors = analytic_family(grid, chart, seed, spinor_amplitude=2.0)
    psi0, psi1, psi2 = (spinors.psi(t1 + offset * dt) for offset in (-1.0, 0.0, 1.0))
    weight = dt * ctx.a**grid.d * grid.dx**grid.d / coeffs.s
    spinor_el = weight * spinor_euler_lagrange(psi0, psi1, psi2, ctx, frozen, coeffs, t1, dt, coefficient=coefficient)
    worst_spinor = 0.0
    for _ in range(directions):
        v = rng.standard_normal(psi1.shape) + 1j * rng.standard_normal(psi1.shape)
        measured = _epsilon_derivative(
            lambda e: spinor_action(psi0, psi1 + e * v, psi2, ctx, frozen, coeffs, dt), VARIATION_STEP
        )
        predicted = float(np.sum(np.real(pointwise_inner(v, spinor_el, ctx, n_slots=0, spinor=True, beta=BETA))))
        scale = float(np.linalg.norm(spinor_el) * np.linalg.norm(v))
        worst_spinor = max(worst_spinor, _mismatch(measured, predicted, scale))
    return worst_map, worst_spinor


def joint_action(
    phis: tuple[FloatArray, FloatArray, FloatArray],
    psis: tuple[ComplexArray, ComplexArray, ComplexArray],
    st: WarpedSpacetime,
    chart: TargetChart,
    grid: Grid,
    t1: float,
    dt: float,
    *,
    coefficient: float = 1.0 / 3.0,
) -> float:
    """φ と ψ を同時に持つ 3 スライスの離散作用.

    S = map_action + ½∫(⟨ψ, iD̸ψ⟩ − ½·coefficient·(Ns)^{2−n}⟨ψ, R^P(ψ,ψ)ψ⟩)dV_h。
    ψ の時間スロットは半ステップ中点の pullback 接続 (ψ_R − ψ_L)/Δt + Γ(φ_m)(q)ψ_m、
    空間スロットと 4 次項は中央スライスで評価する。coefficient = ⅓ で 4 次項の係数は 1/12。
    """
    phi0, phi1, phi2 = phis
    psi0, psi1, psi2 = psis
    total = map_action(phi0, phi1, phi2, st, chart, grid, t1, dt)
    cell = grid.dx**grid.d
    halves = (((phi0, psi0), (phi1, psi1), t1 - 0.5 * dt), ((phi1, psi1), (phi2, psi2), t1 + 0.5 * dt))
    for (phi_l, psi_l), (phi_r, psi_r), th in halves:
        geo = target_geometry(chart, 0.5 * (phi_l + phi_r))
        psi_m = 0.5 * (psi_l + psi_r)
        q = (phi_r - phi_l) / dt
        d_psi = (psi_r - psi_l) / dt + np.einsum("...ijk,...j,...kc->...ic", geo.Gamma, q, psi_m)
        overlap = np.imag(np.einsum("...ij,...ic,...jc->...", geo.G, np.conj(psi_m), d_psi))
        total += 0.5 * dt * st.a_jet(th).value ** grid.d * cell * float(np.sum(overlap))
    ctx = connection_context(st, chart, grid, phi1, t1)
    coeffs = slice_coefficients(st, grid, t1)
    density = np.real(pointwise_inner(psi1, 1j * spatial_dirac(psi1, ctx), ctx, n_slots=0, spinor=True, beta=BETA))
    bil = spinor_bilinears(psi1)
    quartic = np.real(np.einsum("...ijkl,...ik,...jl->...", ctx.geometry.R, bil, bil))
    weight = coeffs.ns ** (2 - st.n)
    space = density - 0.5 * coefficient * weight * quartic
    total += 0.5 * dt * ctx.a**grid.d * cell / coeffs.s * float(np.sum(space))
    return total


def map_equation_residual(
    phis: tuple[FloatArray, FloatArray, FloatArray],
    psi1: ComplexArray,
    st: WarpedSpacetime,
    chart: TargetChart,
    grid: Grid,
    t1: float,
    dt: float,
) -> FloatArray:
    """s²(∂²_tφ − rhs_map) = s²∇_tπ + sṡπ + ½s² tr ġ π + D*Dφ − MapSourceTerms.total().

    ∂²_tφ と π は 3 スライスの中心差分。
    """
    phi0, phi1, phi2 = phis
    pi = (phi2 - phi0) / (2.0 * dt)
    state = FieldState(phi=phi1, pi=pi, psi=psi1, chi=np.zeros_like(psi1), t=t1)
    accel = (phi2 - 2.0 * phi1 + phi0) / dt**2
    return st.s_jet(t1).value ** 2 * (accel - rhs_map(state, st, chart, grid))


def _weighted_norm(field: FloatArray, G: FloatArray, weight: FloatArray) -> float:
    return math.sqrt(float(np.sum(weight * np.einsum("...ij,...i,...j->...", G, field, field))))


def joint_variational_mismatch(
    st: WarpedSpacetime,
    chart: TargetChart,
    grid: Grid,
    *,
    seed: int = 0,
    directions: int = JOINT_DIRECTIONS,
    coefficient: float = 1.0 / 3.0,
    t1: float = CHECK_TIME,
    dt: float = VARIATION_DT,
) -> float:
    """joint_action の φ 変分と発展方程式の残差の最大相対差.

    変分は φ1 + εξ、ψ1 − εΓ(φ1)(ξ)ψ1（ψ を ξ 方向へ平行移動）。予測値は
    Δt Σ w G(ξ, map_equation_residual)、w は _map_weight。相対差の分母は重み付き L² ノルムの積。
    方向 ξ は格子に依存しない滑らかな場なので、格子と Δt を細分しても同じ方向を比べる。
    """
    family = analytic_family(grid, chart, seed, spinor_amplitude=1.0)
    phi0, phi1, phi2 = family.phi(t1 - dt), family.phi(t1), family.phi(t1 + dt)
    psi0, psi1, psi2 = family.psi(t1 - dt), family.psi(t1), family.psi(t1 + dt)
    phis = (phi0, phi1, phi2)
    geo1 = target_geometry(chart, phi1)
    weight = np.broadcast_to(_map_weight(st, grid, t1), grid.shape)
    residual = map_equation_residual(phis, psi1, st, chart, grid, t1, dt)
    covector = dt * weight[..., None] * np.einsum("...ij,...j->...i", geo1.G, residual)
    residual_norm = _weighted_norm(residual, geo1.G, weight)
    worst = 0.0
    for k in range(directions):
        xi = analytic_family(grid, chart, seed + 1 + k, static=True).phi(0.0) - family.base
        transport = np.einsum("...ijk,...j,...kc->...ic", geo1.Gamma, xi, psi1)
        measured = _epsilon_derivative(
            lambda e: joint_action(
                (phi0, phi1 + e * xi, phi2),
                (psi0, psi1 - e * transport, psi2),
                st,
                chart,
                grid,
                t1,
                dt,
                coefficient=coefficient,
            ),
            VARIATION_STEP,
        )
        predicted = float(np.sum(covector * xi))
        scale = dt * residual_norm * _weighted_norm(xi, geo1.G, weight)
        worst = max(worst, _mismatch(measured, predicted, scale))
    return worst


def check_variational_consistency(
    *,
    n: int = 2,
    background: Background | str = Background.OSCILLATING,
    target: TargetKind | str = TargetKind.SPHERE,
    seed: int = 0,
    npts: int = 32,
    directions: int = DEFAULT_DIRECTIONS,
    coefficient: float = 1.0 / 3.0,
) -> CheckResult:
    """離散作用の変分と EL 系の整合性（coefficient を ⅙ にすると不合格になる）."""
    st = background_spacetime(background, n)
    chart = _chart(target)
    grid = Grid(d=n - 1, npts=npts)
    worst_map, worst_spinor = variational_mismatch(
        st, chart, grid, seed=seed, directions=directions, coefficient=coefficient
    )
    residual = max(worst_map, worst_spinor)
    return CheckResult(
        check_id=f"variational_consistency[n={n},{Background(background).value},{TargetKind(target).value}]",
        residual=residual,
        slope=None,
        tolerance=VARIATION_TOLERANCE,
        passed=bool(residual <= VARIATION_TOLERANCE),
        detail=f"map={worst_map:.3e} spinor={worst_spinor:.3e} directions={directions}",
    )


def check_joint_variation(
    *,
    n: int = 2,
    background: Background | str = Background.OSCILLATING,
    target: TargetKind | str = TargetKind.SPHERE,
    seed: int = 0,
    npts: int = 16,
    directions: int = JOINT_DIRECTIONS,
    coefficient: float = 1.0 / 3.0,
) -> CheckResult:
    """ψ ≠ 0 の離散作用の φ 変分が rhs_map の残差へ 2 次で収束するか（格子と Δt を同時に倍化）.

    coefficient を ⅙ にすると ∇R ≠ 0 のターゲット（warped_surface）で差が縮まず不合格になる。
    """
    st = background_spacetime(background, n)
    chart = _chart(target)
    levels = ((npts, VARIATION_DT), (2 * npts, 0.5 * VARIATION_DT))
    coarse, fine = (
        joint_variational_mismatch(
            st, chart, Grid(d=n - 1, npts=pts), seed=seed, directions=directions, coefficient=coefficient, dt=dt
        )
        for pts, dt in levels
    )
    slope = _slope(coarse, fine)
    required = JOINT_ORDER - SLOPE_SLACK
    passed = fine <= EXACT_TOLERANCE or (slope is not None and slope >= required)
    logger.debug("joint variation: coarse=%.3e fine=%.3e slope=%s", coarse, fine, slope)
    return CheckResult(
        check_id=f"joint_variation[n={n},{Background(background).value},{TargetKind(target).value}]",
        residual=fine,
        slope=slope,
        tolerance=EXACT_TOLERANCE,
        passed=bool(passed),
        detail=f"coarse={coarse:.3e} fine={fine:.3e} required_slope={required:.1f}",
    )


# ---- バッテリー ------------------------------------------------------------------


def battery(seed: int = 0) -> list[Callable[[], CheckResult]]:
    """既定サイズの検証バッテリー（各要素は引数なしで CheckResult を返す）."""
    static, de_sitter, osc = Background.STATIC, Background.DE_SITTER, Background.OSCILLATING
    flat, sphere = TargetKind.FLAT, TargetKind.SPHERE
    checks: list[Callable[[], CheckResult]] = [
        partial(check_weitzenboeck, background=static, target=flat, seed=seed),
        partial(check_weitzenboeck, background=de_sitter, target=flat, seed=seed, fd_order=2),
        partial(check_weitzenboeck, background=osc, target=sphere, seed=seed),
        partial(check_weitzenboeck, n=3, background=osc, target=sphere, seed=seed, npts=24),
    ]
    checks += [partial(check_conformal_covariance, factor=factor, seed=seed) for factor in ConformalFactor]
    checks += [
        partial(check_commutators, kind=CommutatorKind.TIME_MAP_K0, background=static, target=flat, seed=seed),
        partial(check_commutators, kind=CommutatorKind.TIME_MAP_K0, seed=seed),
        partial(check_commutators, kind=CommutatorKind.TIME_MAP_K1, seed=seed),
        partial(check_commutators, kind=CommutatorKind.TIME_SPINOR_K0, seed=seed),
        partial(check_commutators, kind=CommutatorKind.LAPLACE_MAP, n=3, seed=seed, npts=24),
        partial(check_commutators, kind=CommutatorKind.LAPLACE_SPINOR, n=3, seed=seed, npts=24),
    ]
    checks += [partial(check_product_rule, k=k, spinor=spinor, seed=seed) for spinor in (False, True) for k in (0, 1)]
    checks += [
        partial(check_variational_consistency, target=sphere, seed=seed),
        partial(check_variational_consistency, target=flat, seed=seed),
        partial(check_joint_variation, target=sphere, seed=seed),
        partial(check_joint_variation, target=TargetKind.WARPED_SURFACE, seed=seed),
    ]
    return checks


def run_battery(seed: int = 0, *, workers: int | None = None) -> list[CheckResult]:
    """バッテリーをスレッドプールで実行する（結果の順序は battery() と同じ）.

    Args:
        seed: 解析的テスト族と摂動方向のシード。
        workers: 最大スレッド数（None なら executor の既定）。
    """
    checks = battery(seed)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda check: check(), checks))
    failed = [r.check_id for r in results if not r.passed]
    logger.info("verify battery: %d checks, %d failed", len(results), len(failed))
    for check_id in failed:
        logger.warning("check failed: %s", check_id)
    return results
