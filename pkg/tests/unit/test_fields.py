from __future__ import annotations

import numpy as np
import pytest

from wavemap_engine.contract.errors import ContractError
from wavemap_engine.domain.rules.fields import (
    FieldState,
    Grid,
    covariant_D,
    covariant_D_power,
    fd_partial,
    l2_integral,
    map_differential,
    pointwise_norm2,
    pullback_context,
    regularity_index,
    sobolev_norm2,
)


def _derivative_error(npts: int, order: int) -> float:
    grid = Grid(d=1, npts=npts, fd_order=order)
    (x,) = grid.coords()
    return float(np.max(np.abs(fd_partial(np.sin(x), 0, grid) - np.cos(x))))


@pytest.mark.parametrize(("order", "slope"), [(2, 1.9), (4, 3.8)])
def test_fd_partial_convergence_order(order, slope):
    coarse = _derivative_error(16, order)
    fine = _derivative_error(32, order)

    assert np.log2(coarse / fine) > slope


def test_fd_partial_summation_by_parts_is_exact():
    grid = Grid(d=1, npts=24)
    rng = np.random.default_rng(0)
    f = rng.standard_normal(24)
    g = rng.standard_normal(24)

    lhs = float(np.sum(f * fd_partial(g, 0, grid)))
    rhs = -float(np.sum(fd_partial(f, 0, grid) * g))
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_fd_partial_acts_along_requested_axis():
    grid = Grid(d=2, npts=32)
    x, y = grid.coords()
    field = np.sin(y) + 0.0 * x

    assert np.max(np.abs(fd_partial(field, 0, grid))) < 1e-12
    np.testing.assert_allclose(fd_partial(field, 1, grid), np.cos(y), atol=1e-4)


def test_fd_partial_rejects_bad_direction():
    with pytest.raises(ContractError):
        fd_partial(np.zeros(16), 1, Grid(d=1, npts=16))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"d": 1, "npts": 6},
        {"d": 1, "npts": 17},
        {"d": 1, "npts": 16, "fd_order": 3},
        {"d": 3, "npts": 16},
    ],
)
def test_grid_validation(kwargs):
    with pytest.raises(ContractError):
        Grid(**kwargs)


def test_grid_geometry():
    grid = Grid(d=2, npts=16)

    assert grid.dx == pytest.approx(2 * np.pi / 16)
    assert grid.shape == (16, 16)
    assert grid.size == 256
    assert grid.refined().npts == 32


def test_field_state_shape_validation():
    phi = np.zeros((8, 2))
    with pytest.raises(ContractError):
        FieldState(phi=phi, pi=np.zeros((8, 3)), psi=np.zeros((8, 2, 2)), chi=np.zeros((8, 2, 2)), t=0.0)
    with pytest.raises(ContractError):
        FieldState(phi=phi, pi=phi.copy(), psi=np.zeros((8, 2)), chi=np.zeros((8, 2)), t=0.0)


def test_field_state_is_finite(map_state):
    phi = np.zeros((8, 2))
    assert map_state(phi, phi.copy()).is_finite()

    phi[3, 1] = np.inf
    assert not map_state(phi, np.zeros((8, 2))).is_finite()


@pytest.mark.parametrize(("n", "expected"), [(2, 1), (3, 2)])
def test_regularity_index(n, expected):
    assert regularity_index(n) == expected


def test_regularity_index_rejects_other_dimensions():
    with pytest.raises(ContractError):
        regularity_index(4)


def test_l2_integral_of_constant_density(grid1d):
    assert l2_integral(np.ones(grid1d.shape), grid1d, 2.0) == pytest.approx(4.0 * np.pi)


def test_flat_covariant_derivative_is_partial_derivative(flat, grid1d):
    (x,) = grid1d.coords()
    phi = np.stack([np.cos(x), np.sin(2 * x)], axis=-1)
    ctx = pullback_context(flat, grid1d, phi, 1.0)

    np.testing.assert_array_equal(covariant_D(phi, ctx), map_differential(phi, grid1d))
    np.testing.assert_array_equal(covariant_D_power(phi, ctx, 0), phi)


def test_covariant_derivative_power_rejects_negative_order(flat, grid1d):
    ctx = pullback_context(flat, grid1d, np.zeros(grid1d.shape + (2,)), 1.0)

    with pytest.raises(ContractError):
        covariant_D_power(np.zeros(grid1d.shape + (2,)), ctx, -1)


def test_pointwise_norm_scales_with_derivative_slots(flat, grid1d):
    phi = np.ones(grid1d.shape + (2,))
    ctx = pullback_context(flat, grid1d, phi, 2.0)

    np.testing.assert_allclose(pointwise_norm2(phi, ctx, n_slots=0), 2.0)
    np.testing.assert_allclose(pointwise_norm2(phi, ctx, n_slots=1), 0.5)


def test_pointwise_norm_uses_target_metric(sphere, grid1d):
    phi = np.zeros(grid1d.shape + (2,))
    ctx = pullback_context(sphere, grid1d, phi, 1.0)
    v = np.zeros(grid1d.shape + (2,))
    v[..., 0] = 1.0

    # 立体射影の原点で G = 4δ
    np.testing.assert_allclose(pointwise_norm2(v, ctx, n_slots=0), 4.0)


def test_sobolev_norm_of_cosine_on_flat_target(flat):
    grid = Grid(d=1, npts=64)
    (x,) = grid.coords()
    phi = np.stack([np.cos(x), np.zeros_like(x)], axis=-1)
    ctx = pullback_context(flat, grid, phi, 1.0)

    assert sobolev_norm2(phi, ctx, 0) == pytest.approx(np.pi, rel=1e-12)
    assert sobolev_norm2(phi, ctx, 1) == pytest.approx(2.0 * np.pi, rel=1e-5)
