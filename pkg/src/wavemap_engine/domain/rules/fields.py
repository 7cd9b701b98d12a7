"""Rules: periodic grid, centered finite differences and covariant spatial calculus.

設計意図:
- 格子軸を配列の先頭に置く: スカラー (*grid)、写像 φ は (*grid, m)、ベクトルスピノル ψ は (*grid, m, 2)。
  D を k 回作用させた場は (*grid, d, ..., d, m[, 2]) で、新しい微分スロットは格子軸の直後に入る。
- 中心差分は np.roll による厳密な周期折り返し。ステンシルは厳密に反対称で、離散部分積分が丸め誤差で成立する。
- 接続項（pullback Christoffel, スピン接続）は ConnectionContext にまとめ、D の呼び出しごとに再計算しない。
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from numpy.typing import NDArray

from wavemap_engine.contract.errors import ContractError
from wavemap_engine.domain.rules.target import TargetChart, TargetGeometry, target_geometry

if TYPE_CHECKING:
    from wavemap_engine.contract.schemas.scenario import ScenarioConfig

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]

DOMAIN_LENGTH = 2.0 * np.pi


@dataclass(frozen=True, slots=True)
class Grid:
    """[0,2π)^d 上の周期一様格子.

    Attributes:
        d: 空間次元 n−1
        npts: 1 方向あたりの点数（偶数かつ 8 以上）
        fd_order: 中心差分の次数（2 または 4）
    """

    d: int
    npts: int
    fd_order: int = 4

    def __post_init__(self) -> None:
        if self.npts < 8 or self.npts % 2 != 0:
            raise ContractError("grid.npts must be even and >= 8", context={"npts": self.npts})
        if self.fd_order not in (2, 4):
            raise ContractError("grid.fd_order must be 2 or 4", context={"fd_order": self.fd_order})
        if self.d not in (1, 2):
            raise ContractError("Spatial dimension must be 1 or 2", context={"d": self.d})

    @classmethod
    def from_config(cls, cfg: "ScenarioConfig") -> "Grid":
        """ScenarioConfig から格子を構築する."""
        return cls(d=cfg.geometry.n - 1, npts=cfg.grid.npts, fd_order=cfg.grid.fd_order)

    @property
    def dx(self) -> float:
        """格子間隔 Δx = 2π/Npts."""
        return DOMAIN_LENGTH / self.npts

    @property
    def shape(self) -> tuple[int, ...]:
        """格子形状."""
        return (self.npts,) * self.d

    @property
    def size(self) -> int:
        """格子点総数."""
        return self.npts**self.d

    def coords(self) -> tuple[FloatArray, ...]:
        """各方向の座標配列（indexing="ij"）."""
        axis = np.arange(self.npts) * self.dx
        return tuple(np.meshgrid(*([axis] * self.d), indexing="ij"))

    def refined(self) -> "Grid":
        """点数を倍にした格子."""
        return Grid(d=self.d, npts=2 * self.npts, fd_order=self.fd_order)


@dataclass(frozen=True, slots=True)
class FieldState:
    """時間スライス 1 枚分の発展変数.

    Attributes:
        phi: φ^I（(*grid, m) 実数）
        pi: π^I = ∂_tφ^I（(*grid, m) 実数）
        psi: ψ^I（(*grid, m, 2) 複素）
        chi: χ^I = ∇_tψ^I（(*grid, m, 2) 複素）
        t: 時刻
    """

    phi: FloatArray
    pi: FloatArray
    psi: ComplexArray
    chi: ComplexArray
    t: float

    def __post_init__(self) -> None:
        if self.phi.shape != self.pi.shape:
            raise ContractError("phi and pi must share a shape", context={"phi": self.phi.shape, "pi": self.pi.shape})
        expected = self.phi.shape + (2,)
        if self.psi.shape != expected or self.chi.shape != expected:
            raise ContractError(
                "psi and chi must have shape (*grid, m, 2)",
                context={"psi": self.psi.shape, "chi": self.chi.shape, "expected": expected},
            )

    def is_finite(self) -> bool:
        """NaN/Inf を含まないか."""
        return bool(
            np.all(np.isfinite(self.phi))
            and np.all(np.isfinite(self.pi))
            and np.all(np.isfinite(self.psi))
            and np.all(np.isfinite(self.chi))
        )


@dataclass(frozen=True, slots=True)
class ConnectionContext:
    """covariant_D が消費する接続データ.

    Attributes:
        grid: 格子
        a: スケール因子 a(t)
        geometry: φ 上で評価したターゲット幾何量
        dphi: ∂_iφ^J（(*grid, d, m)）
        pullback: A[..., i, I, K] = Γ^I_JK(φ) ∂_iφ^J
        omega: スピン接続 ω_i（(d, 2, 2)、時間方向は 0）
    """

    grid: Grid
    a: float
    geometry: TargetGeometry
    dphi: FloatArray
    pullback: FloatArray
    omega: ComplexArray


def fd_partial(field: NDArray, direction: int, grid: Grid, order: int | None = None) -> NDArray:
    """周期中心差分による ∂_i の近似.

    Args:
        field: 先頭 d 軸が格子の場。
        direction: 空間方向 i（0 始まり）。
        grid: 格子。
        order: 差分次数（None なら grid.fd_order）。
    """
    p = grid.fd_order if order is None else order
    if not 0 <= direction < grid.d:
        raise ContractError("Derivative direction out of range", context={"direction": direction, "d": grid.d})
    h = grid.dx
    plus1 = np.roll(field, -1, axis=direction)
    minus1 = np.roll(field, 1, axis=direction)
    if p == 2:
        return (plus1 - minus1) / (2.0 * h)
    if p == 4:
        plus2 = np.roll(field, -2, axis=direction)
        minus2 = np.roll(field, 2, axis=direction)
        return (-plus2 + 8.0 * plus1 - 8.0 * minus1 + minus2) / (12.0 * h)
    raise ContractError("Finite-difference order must be 2 or 4", context={"order": p})


def map_differential(phi: FloatArray, grid: Grid) -> FloatArray:
    """dφ(∂_i)^J = ∂_iφ^J を (*grid, d, m) で返す."""
    return np.stack([fd_partial(phi, i, grid) for i in range(grid.d)], axis=grid.d)


def pullback_context(
    chart: TargetChart,
    grid: Grid,
    phi: FloatArray,
    a: float,
    omega: ComplexArray | None = None,
) -> ConnectionContext:
    """φ から pullback 接続データを構築する（スピン接続は外部から与える）."""
    geometry = target_geometry(chart, phi)
    dphi = map_differential(phi, grid)
    pullback = np.einsum("...ijk,...nj->...nik", geometry.Gamma, dphi)
    if omega is None:
        omega = np.zeros((grid.d, 2, 2), dtype=complex)
    return ConnectionContext(grid=grid, a=a, geometry=geometry, dphi=dphi, pullback=pullback, omega=omega)


def apply_target_endomorphism(A: NDArray, field: NDArray, grid: Grid, spinor: bool) -> NDArray:
    """点ごとの自己準同型 A^I_K（(*grid, m, m)）をターゲット添字へ作用させる."""
    gsize = grid.size
    m = A.shape[-1]
    c = 2 if spinor else 1
    flat = field.reshape(gsize, -1, m, c)
    out = np.einsum("gik,gskc->gsic", A.reshape(gsize, m, m), flat)
    return out.reshape(field.shape)


def _apply_spin_matrix(M: ComplexArray, field: NDArray) -> ComplexArray:
    """定数 2×2 行列をスピノル添字へ作用させる."""
    return np.einsum("ab,...b->...a", M, field)


def covariant_D_direction(field: NDArray, ctx: ConnectionContext, direction: int, *, spinor: bool) -> NDArray:
    """単一方向の共変微分 D_i（スロット補正は平坦スライスのため不要）."""
    out = fd_partial(field, direction, ctx.grid)
    out = out + apply_target_endomorphism(ctx.pullback[..., direction, :, :], field, ctx.grid, spinor)
    if spinor:
        out = out + _apply_spin_matrix(ctx.omega[direction], field)
    return out


def covariant_D(field: NDArray, ctx: ConnectionContext, *, spinor: bool = False) -> NDArray:
    """D: Γ(V) → Γ(T*Σ ⊗ V). 新しい微分スロットを格子軸の直後に追加する.

    Args:
        field: (*grid, *slots, m) または spinor=True なら (*grid, *slots, m, 2)。
        ctx: 接続データ。
        spinor: スピノル因子を持つ場か（ω_i を作用させる）。
    """
    parts = [covariant_D_direction(field, ctx, i, spinor=spinor) for i in range(ctx.grid.d)]
    return np.stack(parts, axis=ctx.grid.d)


def covariant_D_power(field: NDArray, ctx: ConnectionContext, k: int, *, spinor: bool = False) -> NDArray:
    """D^k を繰り返し適用する."""
    if k < 0:
        raise ContractError("Derivative order must be non-negative", context={"k": k})
    out = field
    for _ in range(k):
        out = covariant_D(out, ctx, spinor=spinor)
    return out


def rough_laplacian(field: NDArray, ctx: ConnectionContext, *, spinor: bool = False) -> NDArray:
    """D*D = −g^{ij} D_i D_j（同じステンシルで D* を構成）."""
    total = np.zeros_like(field)
    for i in range(ctx.grid.d):
        first = covariant_D_direction(field, ctx, i, spinor=spinor)
        total = total + covariant_D_direction(first, ctx, i, spinor=spinor)
    return -total / ctx.a**2


def map_rough_laplacian(phi: FloatArray, ctx: ConnectionContext) -> FloatArray:
    """写像の D*Dφ^I = −a⁻² Σ_i (∂_i∂_iφ^I + Γ^I_JK ∂_iφ^J ∂_iφ^K)."""
    total = np.zeros_like(phi)
    for i in range(ctx.grid.d):
        total = total + covariant_D_direction(ctx.dphi[..., i, :], ctx, i, spinor=False)
    return -total / ctx.a**2


def pointwise_inner(
    left: NDArray,
    right: NDArray,
    ctx: ConnectionContext,
    *,
    n_slots: int,
    spinor: bool = False,
    beta: ComplexArray | None = None,
) -> NDArray:
    """点ごとの内積 g^{..}G_IJ (left^I, right^J).

    スピノルでは beta が None なら正定値積 ψ†ξ、与えられれば (βψ)†ξ（不定値対）。
    """
    grid = ctx.grid
    m = ctx.geometry.G.shape[-1]
    c = 2 if spinor else 1
    lf = left.reshape(grid.size, -1, m, c)
    rf = right.reshape(grid.size, -1, m, c)
    if spinor and beta is not None:
        rf = np.einsum("ab,gsib->gsia", beta, rf)
    G = ctx.geometry.G.reshape(grid.size, m, m)
    value = np.einsum("gij,gsic,gsjc->g", G, np.conj(lf), rf)
    return (value * ctx.a ** (-2 * n_slots)).reshape(grid.shape)


def pointwise_norm2(field: NDArray, ctx: ConnectionContext, *, n_slots: int, spinor: bool = False) -> FloatArray:
    """|field|²（g_t と G(φ)、スピノルは正定値積）."""
    return np.real(pointwise_inner(field, field, ctx, n_slots=n_slots, spinor=spinor))


def l2_integral(density: NDArray, grid: Grid, a: float) -> float:
    """∫_Σ density dV_{g_t} = Σ density·a^{n−1}·Δx^{n−1}."""
    return float(np.sum(density) * a**grid.d * grid.dx**grid.d)


def regularity_index(n: int) -> int:
    """エネルギー階数 r（r > (n−1)/2 を満たす最小値: n=2 で 1、n=3 で 2）."""
    if n not in (2, 3):
        raise ContractError("Spacetime dimension must be 2 or 3", context={"n": n})
    return n - 1


def sobolev_norm2(field: NDArray, ctx: ConnectionContext, order: int, *, spinor: bool = False) -> float:
    """Σ_{k≤order} ∫|D^k field|²（共変 D と g_t, G(φ) によるノルム）."""
    total = 0.0
    current = field
    for k in range(order + 1):
        if k > 0:
            current = covariant_D(current, ctx, spinor=spinor)
        total += l2_integral(pointwise_norm2(current, ctx, n_slots=k, spinor=spinor), ctx.grid, ctx.a)
    return total
