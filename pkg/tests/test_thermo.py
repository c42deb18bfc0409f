import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iontweezer.thermo import (
    LeakageError,
    RampSchedule,
    TransitionMatrix,
    analytic_delta_f,
    identity_residual,
    jarzynski_estimate,
    overlap_matrix,
    propagate,
    sudden_ground_overlap,
    thermal_weights,
    work_distribution,
)
from oracles import husimi_ground_survival, oscillator_overlap_sq

RHO = math.sqrt(171 / 133)


def ramp(tau_omega_f):
    return RampSchedule.mass_ratio(1.0, 171, 133, tau_omega_f)


@pytest.fixture(scope="module")
def diabatic():
    r = ramp(0.5)
    return r, propagate(r, 64)


def test_ramp_validation():
    with pytest.raises(ValueError):
        RampSchedule(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        RampSchedule(1.0, 1.0, -1.0)


def test_ramp_profile_linear_in_omega_squared():
    r = RampSchedule(1.0, 2.0, 4.0)
    np.testing.assert_allclose(r.omega_sq([0.0, 1.0, 4.0]), [1.0, 1.75, 4.0])
    assert r.omega_sq(0.0) == 1.0


def test_mass_ratio_endpoint():
    r = ramp(2.0)
    assert r.omega_f / r.omega_i == pytest.approx(RHO)
    assert r.tau * r.omega_f == pytest.approx(2.0)


@pytest.mark.parametrize("ratio", [RHO, 1 / RHO, 2.0])
def test_overlap_ground_state_matches_quadrature(ratio):
    ov = overlap_matrix(ratio, 4, 60)
    assert ov[0, 0] ** 2 == pytest.approx(oscillator_overlap_sq(1.0, ratio), rel=1e-10)
    assert ov[0, 0] ** 2 == pytest.approx(sudden_ground_overlap(1.0, ratio), rel=1e-12)


def test_overlap_rows_orthonormal():
    ov = overlap_matrix(RHO, 40, 120)
    np.testing.assert_allclose(ov @ ov.T, np.eye(40), atol=1e-12)


def test_sudden_limit():
    r = ramp(0.0)
    tm = propagate(r, 16)
    assert tm.probs[0, 0] == pytest.approx(2 * math.sqrt(r.omega_i * r.omega_f) / (r.omega_i + r.omega_f), abs=1e-12)


@pytest.mark.parametrize("tau", [0.5, 2.0, 10.0])
def test_ground_survival_against_classical_trajectories(tau):
    r = ramp(tau)
    tm = propagate(r, 16)
    ref = husimi_ground_survival(r.omega_sq, r.omega_i, r.omega_f, r.tau)
    assert tm.probs[0, 0] == pytest.approx(ref, abs=1e-9)


def test_transition_matrix_invariants(diabatic):
    _, tm = diabatic
    p = tm.probs
    m, n = np.indices(p.shape)
    assert np.all(p[(m + n) % 2 == 1] == 0.0)
    assert p[1, 0] == 0.0
    assert np.all((p >= 0) & (p <= 1))
    assert np.all(np.abs(tm.column_sums - 1) <= 1e-8)


def test_adiabatic_limit():
    tm = propagate(ramp(200.0), 12)
    assert np.all(np.diag(tm.probs)[:6] >= 0.999)


def test_cross_excitation_grows_with_n(diabatic):
    _, tm = diabatic
    off = 1 - np.diag(tm.probs)[:7]
    assert np.all(np.diff(off) >= 0)


def test_leakage_reported():
    with pytest.raises(LeakageError) as err:
        propagate(ramp(0.5), 8, pad=0)
    assert err.value.leakage > 1e-10


def test_point_mass_for_trivial_ramp():
    tm = TransitionMatrix(1.0, 10, np.eye(10))
    d = work_distribution(tm, 1.0, 1.0, 1.0)
    assert np.all(d.work == 0.0)
    est = jarzynski_estimate(d)
    assert est.mean_work == 0.0


def test_work_values_and_normalisation(diabatic):
    r, tm = diabatic
    beta = 1.0
    d = work_distribution(tm, beta, r.omega_i, r.omega_f)
    tail = math.exp(-beta / RHO * tm.n_max)
    assert d.probs.sum() == pytest.approx(1 - tail, abs=1e-10)
    # every support point is (m + 1/2) - (n + 1/2)/rho with m = n + 2k
    n = (d.work - 2 * d.lobe - 0.5 + 0.5 / RHO) / (1 - 1 / RHO)
    np.testing.assert_allclose(n, np.round(n), atol=1e-8)
    with pytest.raises(ValueError):
        work_distribution(tm, 0.0, r.omega_i, r.omega_f)


def test_fig6_lobes(diabatic):
    r, tm = diabatic
    lobes = work_distribution(tm, 0.554, r.omega_i, r.omega_f).lobe_weights()
    main = lobes[0] + lobes[1] + lobes[-1]
    rest = sum(v for k, v in lobes.items() if abs(k) >= 2)
    assert main > 0.999 and rest < 1e-3
    assert lobes[1] > 10 * lobes[2] and lobes[-1] > 10 * lobes[-2]


def test_analytic_free_energy_limits():
    assert analytic_delta_f(1.0, 1.0, 0.7) == 0.0
    assert analytic_delta_f(1.0, RHO, 200.0) == pytest.approx((1 - 1 / RHO) / 2, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 20.0))
def test_free_energy_from_partition_functions(beta_f):
    z = lambda b: 1 / (2 * math.sinh(b / 2))
    ref = -(math.log(z(beta_f)) - math.log(z(beta_f / RHO))) / beta_f
    assert analytic_delta_f(1.0, RHO, beta_f) == pytest.approx(ref, rel=1e-12, abs=1e-15)


def test_thermal_weights():
    w = thermal_weights(0.5, 200)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    assert w[1] / w[0] == pytest.approx(math.exp(-0.5))


@pytest.mark.parametrize("beta", [0.3, 1.0, 3.0])
def test_jarzynski_and_jensen(diabatic, beta):
    r, tm = diabatic
    d = work_distribution(tm, beta, r.omega_i, r.omega_f)
    est = jarzynski_estimate(d)
    df = analytic_delta_f(r.omega_i, r.omega_f, beta)
    assert abs(identity_residual(d, r.omega_i, r.omega_f)) <= 1e-6
    assert est.delta_f == pytest.approx(df, abs=1e-6)
    assert est.mean_work > df


def test_zero_temperature_adiabatic_work():
    r = ramp(200.0)
    tm = propagate(r, 12)
    est = jarzynski_estimate(work_distribution(tm, 40.0, r.omega_i, r.omega_f))
    assert est.mean_work == pytest.approx((1 - 1 / RHO) / 2, abs=1e-3)


def test_estimator_insensitive_to_switching_time():
    runs = [(r, propagate(r, 64)) for r in (ramp(0.5), ramp(10.0))]
    for beta in (0.3, 0.554):
        ests = [jarzynski_estimate(work_distribution(tm, beta, r.omega_i, r.omega_f)) for r, tm in runs]
        assert abs(ests[0].delta_f - ests[1].delta_f) < 1e-6
        assert abs(ests[0].mean_work - ests[1].mean_work) > 1e-2
