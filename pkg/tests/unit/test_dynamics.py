from __future__ import annotations

import numpy as np
import pytest

from wavemap_engine.contract.errors import CFLViolationError, ContractError
from wavemap_engine.contract.schemas.scenario import LapseFamily, LapseSpec, ProfileFamily, ProfileSpec
from wavemap_engine.domain.rules.dynamics import (
    Integrator,
    dirac_residual,
    initial_norm_triple,
    make_initial_data,
    map_source_terms,
    rhs_map,
    rhs_spinor,
    slice_coefficients,
    spinor_source_terms,
    stable_dt,
    step_rk4,
    wave_map_rhs,
)
from wavemap_engine.domain.rules.energy import energy_map
from wavemap_engine.domain.rules.fields import FieldState, Grid
from wavemap_engine.domain.rules.spin import connection_context

CFL = 0.4


def _random_state(grid: Grid, m: int = 2, *, seed: int = 0, amplitude: float = 0.1) -> FieldState:
    rng = np.random.default_rng(seed)
    shape = grid.shape + (m,)
    spinor = shape + (2,)
    return FieldState(
        phi=amplitude * rng.standard_normal(shape),
        pi=amplitude * rng.standard_normal(shape),
        psi=amplitude * (rng.standard_normal(spinor) + 1j * rng.standard_normal(spinor)),
        chi=amplitude * (rng.standard_normal(spinor) + 1j * rng.standard_normal(spinor)),
        t=0.2,
    )


def test_source_terms_degenerate_exactly_on_sphere_in_two_dimensions(de_sitter_st, sphere, grid1d):
    state = _random_state(grid1d)
    ctx = connection_context(de_sitter_st, sphere, grid1d, state.phi, state.t)
    coeffs = slice_coefficients(de_sitter_st, grid1d, state.t)

    map_terms = map_source_terms(state, de_sitter_st, ctx, coeffs)
    spinor_terms = spinor_source_terms(state, de_sitter_st, ctx, coeffs)

    assert np.all(map_terms.sharp_gradient == 0.0)
    assert np.all(map_terms.lapse == 0.0)
    assert np.all(spinor_terms.lapse_derivative == 0.0)
    assert np.all(spinor_terms.grad_curvature == 0.0)
    assert np.any(map_terms.spinor_coupling != 0.0)


def test_spinor_rhs_of_zero_spinor_is_zero(de_sitter_st, sphere, grid1d, map_state):
    rng = np.random.default_rng(1)
    phi = 0.1 * rng.standard_normal(grid1d.shape + (2,))
    state = map_state(phi, np.zeros_like(phi))

    assert np.all(rhs_spinor(state, de_sitter_st, sphere, grid1d) == 0.0)


def test_map_rhs_matches_independent_wave_map_rhs(make_st, sphere):
    st = make_st(
        3,
        s=ProfileSpec(family=ProfileFamily.EXP, rate=0.5),
        a=ProfileSpec(family=ProfileFamily.OSC, mu=0.1, omega=1.0),
        lapse=LapseSpec(family=LapseFamily.WAVE, beta=0.2, omega=1.0),
    )
    grid = Grid(d=2, npts=16)
    full = _random_state(grid, seed=2)
    state = FieldState(phi=full.phi, pi=full.pi, psi=np.zeros_like(full.psi), chi=np.zeros_like(full.chi), t=full.t)

    np.testing.assert_allclose(
        rhs_map(state, st, sphere, grid),
        wave_map_rhs(state.phi, state.pi, st, sphere, grid, state.t),
        atol=1e-12,
    )


def test_zero_spinor_stays_exactly_zero(de_sitter_st, sphere, grid1d):
    state = make_initial_data(de_sitter_st, sphere, grid1d, epsilon=0.05, seed=4, mode_cutoff=2, spinor=False)
    integrator = Integrator(state, de_sitter_st, sphere, grid1d, cfl=CFL, dt_max=0.05)

    final = integrator.run(0.2)

    assert np.all(final.psi == 0.0)
    assert np.all(final.chi == 0.0)
    assert np.any(final.phi != state.phi)


def test_initial_data_normalisation_and_dirac_compatibility(de_sitter_st, sphere, grid1d):
    state = make_initial_data(de_sitter_st, sphere, grid1d, epsilon=0.1, seed=3, mode_cutoff=2)
    triple = initial_norm_triple(state.phi, state.pi, state.psi, sphere.base_point(), de_sitter_st, sphere, grid1d, 0.0)

    assert triple == pytest.approx(0.05, rel=1e-9)
    assert np.any(state.psi != 0.0)
    assert dirac_residual(state, de_sitter_st, sphere, grid1d) <= 1e-12


def test_initial_data_is_deterministic_in_seed(de_sitter_st, sphere, grid1d):
    first = make_initial_data(de_sitter_st, sphere, grid1d, epsilon=0.1, seed=9, mode_cutoff=2)
    second = make_initial_data(de_sitter_st, sphere, grid1d, epsilon=0.1, seed=9, mode_cutoff=2)

    np.testing.assert_array_equal(first.phi, second.phi)
    np.testing.assert_array_equal(first.chi, second.chi)


def test_zero_amplitude_initial_data_sits_at_base_point(de_sitter_st, sphere, grid1d):
    state = make_initial_data(de_sitter_st, sphere, grid1d, epsilon=0.0, seed=0, mode_cutoff=2)

    assert np.all(state.phi == 0.0)
    assert np.all(state.psi == 0.0)
    assert np.all(state.pi == 0.0)


def test_initial_data_rejects_negative_amplitude(de_sitter_st, sphere, grid1d):
    with pytest.raises(ContractError):
        make_initial_data(de_sitter_st, sphere, grid1d, epsilon=-0.1, seed=0, mode_cutoff=2)


def test_stable_dt(static_st, grid1d):
    assert stable_dt(static_st, grid1d, 0.0, CFL, 1.0) == pytest.approx(CFL * grid1d.dx)
    assert stable_dt(static_st, grid1d, 0.0, CFL, 1e-3) == 1e-3


def test_step_rejects_cfl_violation_and_nonpositive_step(static_st, flat, grid1d, map_state):
    phi = np.zeros(grid1d.shape + (2,))
    state = map_state(phi, phi.copy())

    with pytest.raises(CFLViolationError):
        step_rk4(state, static_st, flat, grid1d, 1.0, cfl=CFL)
    with pytest.raises(ContractError):
        step_rk4(state, static_st, flat, grid1d, 0.0)


def test_integrator_lands_on_final_time(static_st, sphere, grid1d):
    state = make_initial_data(static_st, sphere, grid1d, epsilon=0.02, seed=1, mode_cutoff=2, spinor=False)
    seen: list[int] = []
    integrator = Integrator(state, static_st, sphere, grid1d, cfl=CFL, dt_max=0.07)

    final = integrator.run(0.3, monitor=lambda _state, step: seen.append(step))

    assert final.t == pytest.approx(0.3, abs=1e-14)
    assert integrator.steps == 5
    assert seen == [0, 1, 2, 3, 4, 5]
    assert not final.phi.flags.writeable


def _linear_wave_error(static_st, flat, npts: int) -> float:
    grid = Grid(d=1, npts=npts)
    (x,) = grid.coords()
    phi = np.stack([0.1 * np.cos(x), np.zeros_like(x)], axis=-1)
    zeros = np.zeros(grid.shape + (2, 2), dtype=complex)
    state = FieldState(phi=phi, pi=np.zeros_like(phi), psi=zeros, chi=zeros.copy(), t=0.0)

    final = Integrator(state, static_st, flat, grid, cfl=CFL, dt_max=10.0).run(1.0)
    exact = 0.1 * np.cos(x) * np.cos(1.0)
    err = final.phi[..., 0] - exact
    return float(np.sqrt(np.sum(err**2) * grid.dx))


def test_linear_wave_converges_at_fourth_order(static_st, flat):
    coarse = _linear_wave_error(static_st, flat, 32)
    fine = _linear_wave_error(static_st, flat, 64)

    assert np.log2(coarse / fine) >= 3.8


@pytest.mark.slow
def test_static_sphere_wave_map_conserves_energy(static_st, sphere):
    grid = Grid(d=1, npts=128)
    state = make_initial_data(static_st, sphere, grid, epsilon=1e-2, seed=0, mode_cutoff=2, spinor=False)
    initial = energy_map(state, static_st, sphere, grid, 0)

    final = Integrator(state, static_st, sphere, grid, cfl=CFL, dt_max=1.0).run(10.0)

    assert abs(energy_map(final, static_st, sphere, grid, 0) / initial - 1.0) <= 1e-6


def _max_dirac_residual(st, chart, npts: int, t_end: float) -> float:
    grid = Grid(d=1, npts=npts)
    state = make_initial_data(st, chart, grid, epsilon=0.05, seed=2, mode_cutoff=2)
    worst = [0.0]

    def monitor(snapshot: FieldState, _step: int) -> None:
        worst[0] = max(worst[0], dirac_residual(snapshot, st, chart, grid))

    Integrator(state, st, chart, grid, cfl=CFL, dt_max=1.0).run(t_end, monitor=monitor)
    return worst[0]


def test_dirac_constraint_residual_shrinks_under_refinement(de_sitter_st, sphere):
    coarse = _max_dirac_residual(de_sitter_st, sphere, 32, 0.5)
    fine = _max_dirac_residual(de_sitter_st, sphere, 64, 0.5)

    assert fine <= coarse / 4.0
