from __future__ import annotations

import numpy as np
import pytest

from wavemap_engine.contract.errors import ContractError, ProfileDomainError
from wavemap_engine.contract.schemas.scenario import LapseFamily, LapseSpec, ProfileFamily, ProfileSpec
from wavemap_engine.domain.rules.geometry import (
    christoffels,
    conformal_factor_integrals,
    curvature,
    f_rate,
    lapse_field,
    metric_components,
    phi_cumulative,
    profile_jet,
    s_inverse_integrable,
    second_fundamental_form,
    smallness_threshold,
)

EXP = ProfileSpec(family=ProfileFamily.EXP, rate=1.0)
OSC = ProfileSpec(family=ProfileFamily.OSC, mu=0.1, omega=1.0)


def test_christoffels_de_sitter_at_zero(make_st):
    data = christoffels(make_st(2, s=EXP), 0.0)

    assert data.gamma_000 == pytest.approx(-1.0)
    assert np.all(data.gamma_0ij == 0.0)
    assert np.all(data.gamma_j_i0 == 0.0)
    assert np.all(data.gamma_spatial == 0.0)


def test_christoffels_static_vanish(make_st):
    assert np.all(christoffels(make_st(3), 1.7).as_array() == 0.0)


def test_christoffels_oscillating_scale_factor(make_st):
    data = christoffels(make_st(3, a=OSC), 0.0)

    np.testing.assert_allclose(data.gamma_0ij, 0.1 * np.eye(2), atol=1e-15)
    np.testing.assert_allclose(data.gamma_0ij, data.gamma_0ij.T)


def test_christoffels_full_array_is_symmetric_in_lower_indices(make_st):
    full = christoffels(make_st(3, s=EXP, a=OSC), 0.4).as_array()

    np.testing.assert_allclose(full, np.swapaxes(full, 1, 2), atol=0.0)


@pytest.mark.parametrize(
    ("s", "a", "expected"),
    [
        (None, None, 0.0),
        (None, ProfileSpec(family=ProfileFamily.EXP, rate=1.0), -1.0),
        (EXP, OSC, -0.1),
    ],
)
def test_second_fundamental_form(make_st, s, a, expected):
    ii = second_fundamental_form(make_st(3, s=s, a=a), 0.0)

    np.testing.assert_allclose(ii, expected * np.eye(2), atol=1e-15)


def test_curvature_of_static_metric_vanishes(make_st):
    data = curvature(make_st(3), 0.3)

    assert data.scal == 0.0
    assert np.all(data.riemann == 0.0)


def test_riemann_antisymmetric_in_last_pair(make_st):
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(100):
        s = ProfileSpec(family=ProfileFamily.EXP, rate=float(rng.uniform(0.0, 1.0)))
        a = ProfileSpec(family=ProfileFamily.OSC, mu=float(rng.uniform(-0.5, 0.5)), omega=float(rng.uniform(0.5, 2.0)))
        n = int(rng.integers(2, 4))
        riemann = curvature(make_st(n, s=s, a=a), float(rng.uniform(0.0, 1.0))).riemann
        worst = max(worst, float(np.max(np.abs(riemann + np.swapaxes(riemann, 2, 3)))))

    assert worst <= 1e-12


@pytest.mark.parametrize("t", [0.0, 0.7, 2.1])
def test_scalar_curvature_matches_proper_time_formula(make_st, t):
    st = make_st(3, s=EXP, a=OSC)
    sj = profile_jet(st.s, t)
    aj = profile_jet(st.a, t)
    # ' = s d/dt
    a1 = sj.value * aj.d1
    a2 = sj.value * (sj.d1 * aj.d1 + sj.value * aj.d2)
    d = 2
    expected = 2 * d * a2 / aj.value + d * (d - 1) * (a1 / aj.value) ** 2

    assert curvature(st, t).scal == pytest.approx(expected, rel=1e-10, abs=1e-14)


def test_scalar_curvature_of_exponential_scale_factor(make_st):
    st = make_st(3, a=ProfileSpec(family=ProfileFamily.EXP, rate=0.5))
    # a = e^{t/2}, s = 1: scal = 4·¼ + 2·¼
    assert curvature(st, 0.4).scal == pytest.approx(1.5, rel=1e-12)


def _stencil(fn, t, h):
    return (fn(t - 2 * h) - 8 * fn(t - h) + 8 * fn(t + h) - fn(t + 2 * h)) / (12 * h)


def _christoffels_from_metric(st, t):
    n = st.n
    g_inv = np.linalg.inv(metric_components(st, t))
    dg = np.zeros((n, n, n))
    dg[0] = _stencil(lambda u: metric_components(st, u), t, 1e-3)
    return 0.5 * (
        np.einsum("rl,mln->rmn", g_inv, dg) + np.einsum("rl,nlm->rmn", g_inv, dg) - np.einsum("rl,lmn->rmn", g_inv, dg)
    )


def test_scalar_curvature_matches_metric_finite_differences(make_st):
    st = make_st(3, s=EXP, a=OSC)
    t = 0.4
    n = st.n
    gamma = _christoffels_from_metric(st, t)
    d_gamma = np.zeros((n, n, n, n))
    d_gamma[0] = _stencil(lambda u: _christoffels_from_metric(st, u), t, 5e-3)
    riemann = (
        np.einsum("mrns->rsmn", d_gamma)
        - np.einsum("nrms->rsmn", d_gamma)
        + np.einsum("rml,lns->rsmn", gamma, gamma)
        - np.einsum("rnl,lms->rsmn", gamma, gamma)
    )
    scal = np.einsum("sn,rsrn->", np.linalg.inv(metric_components(st, t)), riemann)

    np.testing.assert_allclose(gamma, christoffels(st, t).as_array(), rtol=1e-9, atol=1e-11)
    assert curvature(st, t).scal == pytest.approx(float(scal), rel=1e-8)


def test_profile_domain_error_on_nonpositive_s(make_st):
    st = make_st(2, s=ProfileSpec(family=ProfileFamily.POWER, p=1.0))

    with pytest.raises(ProfileDomainError):
        christoffels(st, -1.0)


def test_lapse_wave_has_time_derivative(make_st):
    st = make_st(2, lapse=LapseSpec(family=LapseFamily.WAVE, beta=0.2, omega=1.0))
    x = np.linspace(0.0, 2.0 * np.pi, 9)
    lapse = lapse_field(st, 0.5, x)

    np.testing.assert_allclose(lapse.dt, 0.2 * np.sin(x - 0.5))
    assert np.all(lapse.value > 0.0)


def test_conformal_factor_integrals_exponential_n3(make_st):
    report = conformal_factor_integrals(make_st(3, s=EXP), 5.0)
    expected = 1.0 - np.exp(-5.0)

    assert report.s_inverse_integral == pytest.approx(expected, rel=1e-9)
    assert report.f_integral == pytest.approx(expected, rel=1e-9)
    assert report.f_closed_form == pytest.approx(expected, rel=1e-12)
    assert report.phi == pytest.approx(2.0 * expected, rel=1e-9)
    assert report.integrable
    assert not report.warning


def test_conformal_factor_integrals_n2_has_no_f(make_st):
    report = conformal_factor_integrals(make_st(2, s=EXP), 3.0)

    assert report.f_integral == 0.0
    assert report.f_closed_form is None
    assert f_rate(make_st(2, s=EXP), 1.0) == 0.0


def test_conformal_factor_integrals_power_law(make_st):
    st = make_st(2, s=ProfileSpec(family=ProfileFamily.POWER, p=2.0))
    report = conformal_factor_integrals(st, 4.0)

    assert report.phi == pytest.approx(1.0 - 1.0 / 5.0, rel=1e-9)
    assert s_inverse_integrable(st)


def test_non_integrable_profile_sets_warning(make_st):
    report = conformal_factor_integrals(make_st(2), 10.0)

    assert report.phi == pytest.approx(10.0)
    assert not report.integrable
    assert report.warning
    assert smallness_threshold(make_st(2)) is None


def test_conformal_factor_integrals_at_zero_horizon(make_st):
    report = conformal_factor_integrals(make_st(3, s=EXP), 0.0)

    assert report.phi == 0.0
    assert report.s_inverse_integral == report.f_integral == 0.0
    assert report.f_closed_form == 0.0
    assert report.integrable


def test_conformal_factor_integrals_rejects_negative_horizon(make_st):
    with pytest.raises(ProfileDomainError):
        conformal_factor_integrals(make_st(2, s=EXP), -1.0)


def test_phi_cumulative_is_monotone_and_consistent(make_st):
    st = make_st(3, s=EXP)
    times = np.linspace(0.0, 4.0, 9)
    phi = phi_cumulative(st, times)

    assert phi[0] == 0.0
    assert np.all(np.diff(phi) > 0.0)
    assert phi[-1] == pytest.approx(conformal_factor_integrals(st, 4.0).phi, rel=1e-9)


def test_phi_cumulative_integrates_from_zero(make_st):
    st = make_st(3, s=EXP)
    phi = phi_cumulative(st, np.array([1.0, 2.0]))

    # 先頭標本が t > 0 でも下端は t = 0
    assert phi[0] == pytest.approx(conformal_factor_integrals(st, 1.0).phi, rel=1e-9)
    assert phi[1] == pytest.approx(conformal_factor_integrals(st, 2.0).phi, rel=1e-9)


def test_phi_cumulative_rejects_bad_times(make_st):
    st = make_st(2, s=EXP)

    with pytest.raises(ContractError):
        phi_cumulative(st, np.array([-0.5, 1.0]))
    with pytest.raises(ContractError):
        phi_cumulative(st, np.array([1.0, 0.5]))


def test_smallness_threshold_exponential(make_st):
    # Φ_∞ = 2 (n=3, s=e^t)
    assert smallness_threshold(make_st(3, s=EXP)) == pytest.approx(0.25, rel=1e-8)
