from __future__ import annotations

import numpy as np
import pytest

from wavemap_engine.contract.errors import ChartExitError, ContractError
from wavemap_engine.contract.schemas.scenario import TargetKind, WarpFamily
from wavemap_engine.domain.rules.target import (
    TargetChart,
    chart_norm,
    check_chart,
    curvature_operator,
    gauss_curvature,
    metric_derivative,
    sharp_gradient_term,
    target_geometry,
)

SPHERE = TargetChart(kind=TargetKind.SPHERE, dim=2)
SPHERE3 = TargetChart(kind=TargetKind.SPHERE, dim=3)
FLAT = TargetChart(kind=TargetKind.FLAT, dim=2)


def _warped(warp: WarpFamily, coeff: float = 1.0) -> TargetChart:
    return TargetChart(kind=TargetKind.WARPED_SURFACE, dim=2, warp=warp, warp_coeff=coeff)


def _points(chart: TargetChart, count: int = 20, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    y = rng.uniform(-1.0, 1.0, size=(count, chart.dim))
    if chart.kind is TargetKind.WARPED_SURFACE:
        y[:, 0] = rng.uniform(0.5, 1.5, size=count)
    return y


def _fd_metric(chart: TargetChart, y: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """∂_L G_IJ を [..., L, I, J] で中心差分する."""
    out = np.zeros(y.shape[:-1] + (chart.dim, chart.dim, chart.dim))
    for L in range(chart.dim):
        e = np.zeros(chart.dim)
        e[L] = h
        out[..., L, :, :] = (target_geometry(chart, y + e).G - target_geometry(chart, y - e).G) / (2 * h)
    return out


@pytest.mark.parametrize("chart", [SPHERE, SPHERE3, FLAT, _warped(WarpFamily.SINH), _warped(WarpFamily.CUBIC, 0.5)])
def test_metric_is_symmetric_positive_definite(chart):
    G = target_geometry(chart, _points(chart)).G

    np.testing.assert_allclose(G, np.swapaxes(G, -1, -2), atol=0.0)
    assert np.all(np.linalg.eigvalsh(G) > 0.0)


@pytest.mark.parametrize("chart", [SPHERE, SPHERE3, _warped(WarpFamily.SINH), _warped(WarpFamily.CUBIC, 0.5)])
def test_christoffels_match_metric_derivatives(chart):
    y = _points(chart)
    geo = target_geometry(chart, y)
    dG = _fd_metric(chart, y)
    # Γ^I_JK = ½ G^{IL}(∂_J G_LK + ∂_K G_LJ − ∂_L G_JK)
    expected = 0.5 * (
        np.einsum("...il,...jlk->...ijk", geo.Ginv, dG)
        + np.einsum("...il,...klj->...ijk", geo.Ginv, dG)
        - np.einsum("...il,...ljk->...ijk", geo.Ginv, dG)
    )

    np.testing.assert_allclose(geo.Gamma, expected, atol=1e-7)
    np.testing.assert_allclose(metric_derivative(geo), dG, atol=1e-7)


def test_flat_target_has_no_curvature():
    geo = target_geometry(FLAT, _points(FLAT))

    assert np.all(geo.Gamma == 0.0)
    assert np.all(geo.R == 0.0)
    assert np.all(geo.gradR == 0.0)


@pytest.mark.parametrize("chart", [SPHERE, SPHERE3])
def test_sphere_curvature_operator_on_orthonormal_pair(chart):
    y = _points(chart, count=1)[0]
    G = target_geometry(chart, y).G
    # 共形平坦なので座標軸方向の正規化で正規直交になる
    scale = 1.0 / np.sqrt(G[0, 0])
    X = np.zeros(chart.dim)
    Y = np.zeros(chart.dim)
    X[0] = scale
    Y[1] = scale

    np.testing.assert_allclose(curvature_operator(chart, y, X, Y, Y), X, atol=1e-13)
    np.testing.assert_allclose(curvature_operator(chart, y, X, Y, X), -Y, atol=1e-13)


def test_sphere_gradient_of_curvature_vanishes_exactly():
    y = _points(SPHERE)
    rng = np.random.default_rng(3)
    raw = rng.standard_normal((20, 2, 2)) + 1j * rng.standard_normal((20, 2, 2))
    hermitian = raw + np.conj(np.swapaxes(raw, -1, -2))

    assert np.all(target_geometry(SPHERE, y).gradR == 0.0)
    assert np.all(sharp_gradient_term(SPHERE, y, hermitian) == 0.0)


@pytest.mark.parametrize(
    ("warp", "coeff", "expected"),
    [
        (WarpFamily.SINH, 1.0, lambda r: -np.ones_like(r)),
        (WarpFamily.SIN, 1.0, lambda r: np.ones_like(r)),
        (WarpFamily.LINEAR, 1.0, lambda r: np.zeros_like(r)),
        (WarpFamily.CUBIC, 0.5, lambda r: -3.0 * r / (r + 0.5 * r**3)),
    ],
)
def test_warped_surface_gauss_curvature(warp, coeff, expected):
    r = np.linspace(0.3, 1.4, 7)
    y = np.stack([r, np.zeros_like(r)], axis=-1)
    k, _ = gauss_curvature(_warped(warp, coeff), y)

    np.testing.assert_allclose(k, expected(r), atol=1e-14)


def test_warped_surface_gradient_of_curvature_matches_finite_difference():
    chart = _warped(WarpFamily.CUBIC, 0.5)
    y = np.array([0.8, 0.2])
    h = 1e-5
    k_plus, _ = gauss_curvature(chart, y + np.array([h, 0.0]))
    k_minus, _ = gauss_curvature(chart, y - np.array([h, 0.0]))
    _, dk = gauss_curvature(chart, y)

    assert float(dk[0]) == pytest.approx(float(k_plus - k_minus) / (2 * h), rel=1e-7)
    assert dk[1] == 0.0


def test_sharp_gradient_rejects_non_hermitian_table():
    chart = _warped(WarpFamily.CUBIC, 0.5)
    y = _points(chart, count=4)
    rng = np.random.default_rng(1)
    table = rng.standard_normal((4, 2, 2)) + 1j * rng.standard_normal((4, 2, 2))

    with pytest.raises(ContractError):
        sharp_gradient_term(chart, y, table)


def test_check_chart_rejects_points_outside_radius():
    chart = TargetChart(kind=TargetKind.SPHERE, dim=2, chart_radius=2.0)

    check_chart(chart, np.array([[1.0, 1.0]]))
    with pytest.raises(ChartExitError):
        check_chart(chart, np.array([[0.0, 0.0], [2.0, 0.5]]))


def test_check_chart_rejects_non_finite_and_wrong_dimension():
    with pytest.raises(ChartExitError):
        check_chart(SPHERE, np.array([[np.nan, 0.0]]))
    with pytest.raises(ContractError):
        check_chart(SPHERE, np.zeros((3, 3)))


def test_check_chart_rejects_nonpositive_radius_on_warped_surface():
    with pytest.raises(ChartExitError):
        check_chart(_warped(WarpFamily.SINH), np.array([[-0.1, 0.0]]))


def test_chart_norm_reports_maximum_radius():
    phi = np.array([[[0.3, 0.4]], [[0.0, 0.1]]])

    assert chart_norm(SPHERE, phi) == pytest.approx(0.5)


def test_base_point_defaults():
    assert np.all(SPHERE.base_point() == 0.0)
    np.testing.assert_array_equal(_warped(WarpFamily.SINH).base_point(), [1.0, 0.0])
