import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from lucas_uzawa import closed_form as cf
from lucas_uzawa.calibration import calibration_from_u0
from lucas_uzawa.errors import DivergentIntegralError
from lucas_uzawa.params import derive_constants

from conftest import P1, P1_BGP, bgp_endowment, random_feasible


def test_z_fixed_point():
    t = np.linspace(0, 300, 31)
    assert np.allclose(cf.z_at(P1, 1.0, t), 1.0, rtol=1e-15)


def test_z_bernoulli_value():
    assert cf.z_at(P1, 2.0, 20.0) == pytest.approx(1.2561060185, abs=1e-9)


@pytest.mark.parametrize("z0", [0.3, 1.0, 2.0, 17.0])
def test_z_initial_condition(z0):
    assert cf.z_at(P1, z0, 0.0) == z0
    assert cf.z_at(P1, z0, np.array([0.0, 1.0]))[0] == z0


def test_F_B_at_zero_and_constant_integrand():
    assert cf.F_at(P1, 1.3, 0.0) == 0.0 and cf.B_at(P1, 1.3, 0.0) == 0.0
    assert cf.F_at(P1, 1.0, 10.0) == pytest.approx((1 - math.exp(-0.95)) / 0.095, rel=1e-12)
    assert cf.B_at(P1, 1.0, 10.0) == pytest.approx((1 - math.exp(-0.45)) / 0.045, rel=1e-12)
    assert cf.B_at(P1, 1.0, 10.0) == pytest.approx(8.0527077417, abs=1e-9)


def test_F_B_star_constant_integrand():
    assert cf.F_star(P1, 1.0) == pytest.approx(1 / 0.095, rel=1e-13)
    assert cf.B_star(P1, 1.0) == pytest.approx(1 / 0.045, rel=1e-13)


@pytest.mark.parametrize("z0", [0.2, 0.8675, 3.0])
def test_F_B_star_against_infinite_range_quadrature(z0):
    dc = derive_constants(P1)
    q = (P1.sigma - P1.beta) / P1.sigma
    for rate, ours in ((dc.xi, cf.F_star(P1, z0)), (dc.xi - dc.varphi, cf.B_star(P1, z0))):
        ref, err = quad(lambda s: cf.z_at(P1, z0, s) ** q * math.exp(-rate * s), 0, np.inf,
                        epsabs=1e-13, epsrel=1e-13, limit=500)
        assert ours == pytest.approx(ref, rel=1e-10)


def test_divergent_B_star():
    bad = P1.replace(sigma=0.8, rho=0.001)
    with pytest.raises(DivergentIntegralError):
        cf.B_star(bad, 1.0)


def test_F_at_plus_remaining_is_F_star():
    t = np.array([0.0, 3.0, 25.0, 80.0])
    total = cf.F_at(P1, 0.6, t) + cf.F_remaining(P1, 0.6, t)
    assert np.allclose(total, cf.F_star(P1, 0.6), rtol=1e-12)


def test_array_and_scalar_evaluation_agree():
    t = np.array([40.0, 0.0, 12.5, 12.5])
    arr = cf.scaled_tail(P1, 0.7, 0.095, t)
    for ti, v in zip(t, arr):
        assert cf.scaled_tail(P1, 0.7, 0.095, ti) == pytest.approx(v, rel=1e-12)


@pytest.fixture(scope="module")
def bgp_cal():
    return calibration_from_u0(P1, P1_BGP, 0.9)


def test_bgp_calibration_values(bgp_cal):
    assert bgp_cal.z0 == pytest.approx(1.0, rel=1e-15)
    assert bgp_cal.c0 == pytest.approx(0.095, rel=1e-12)
    assert bgp_cal.lambda0 == pytest.approx(0.095**-2, rel=1e-12)
    assert bgp_cal.lambda0 == pytest.approx(110.80332, abs=1e-5)
    assert bgp_cal.mu0 == pytest.approx(110.80332, abs=1e-5)


def test_bgp_k_c_h(bgp_cal):
    t = np.array([0.0, 10.0, 100.0])
    assert np.allclose(cf.k_at(P1, P1_BGP, bgp_cal, t), np.exp(0.005 * t), rtol=1e-12)
    assert cf.k_at(P1, P1_BGP, bgp_cal, 100.0) == pytest.approx(1.648721, abs=1e-6)
    assert np.allclose(cf.c_at(P1, P1_BGP, bgp_cal, t), 0.095 * np.exp(0.005 * t), rtol=1e-12)
    h = cf.h_at(P1, P1_BGP, bgp_cal, t, 0.9)
    assert np.allclose(h, 10 / 9 * np.exp(0.005 * t), rtol=1e-12)


def test_bgp_controls_constant(bgp_cal):
    t = np.linspace(0, 200, 41)
    assert np.allclose(cf.u_form1_at(P1, bgp_cal, t), 0.9, rtol=1e-12)
    assert np.allclose(cf.u_form2_at(P1, P1_BGP, bgp_cal, t), 0.9, rtol=1e-12)


def test_u_form2_bgp_arithmetic(bgp_cal):
    # numerator brace 1*(2*0.095 - 0.04) + (-0.05) = 0.10; denominator -0.09*F* + 2
    Fs = 1 / 0.095
    expected = 0.9 * 0.10 * Fs / (-0.09 * Fs + 2)
    assert expected == pytest.approx(0.9, rel=1e-14)
    assert cf.u_form2_at(P1, P1_BGP, bgp_cal, 0.0) == pytest.approx(expected, rel=1e-12)


def test_costate_scaling():
    lam1, _ = cf.costates_at(P1, 1.0, 1.0, 0.3, 0.5)
    lam2, _ = cf.costates_at(P1, 1.0, 1.0, 0.6, 0.5)
    assert lam2 == pytest.approx(lam1 / 2**P1.sigma, rel=1e-14)


def test_costates_reject_nonpositive():
    with pytest.raises(ValueError):
        cf.costates_at(P1, 1.0, 0.0, 0.3, 0.5)


def test_h_rejects_nonpositive_control(bgp_cal):
    with pytest.raises(ValueError):
        cf.h_at(P1, P1_BGP, bgp_cal, 1.0, 0.0)


def test_welfare_bgp(bgp_cal):
    analytic = 1 / 0.04 - (1 / 0.095) / (0.04 + (2 - 1) * 0.005)
    res = cf.welfare(P1, P1_BGP, bgp_cal)
    assert res.value == pytest.approx(analytic, rel=1e-12)
    assert res.value == pytest.approx(-208.9181, abs=1e-3)


def test_welfare_off_bgp_against_infinite_quadrature(p1_off):
    cal, e = p1_off.calibration, p1_off.endowment
    flow = lambda t: (cf.c_at(P1, e, cal, t) ** (1 - P1.sigma) - 1) / (1 - P1.sigma) * math.exp(-P1.rho * t)
    with np.errstate(over="ignore"):
        ref = quad(flow, 0, np.inf, epsabs=1e-12, epsrel=1e-12, limit=500)[0]
    assert p1_off.welfare().value == pytest.approx(ref, rel=1e-9)


def test_discounted_utility_constant_paths():
    assert cf.discounted_utility(lambda t: 1.0, 2.0, 0.04, 0.0, 50.0).value == pytest.approx(0, abs=1e-14)
    for sigma in (0.5, 2.0, 3.0):
        res = cf.discounted_utility(lambda t: 0.7, sigma, 0.05, 0.0, 30.0)
        assert res.value == pytest.approx((0.7 ** (1 - sigma) - 1) / ((1 - sigma) * 0.05), rel=1e-12)


def test_welfare_divergent():
    with pytest.raises(DivergentIntegralError):
        cf.discounted_utility(lambda t: 1.0, 0.5, 0.01, 0.1, 10.0)


def _random_solution(seed, off=True):
    rng = np.random.default_rng(seed)
    p = random_feasible(rng)
    e = bgp_endowment(p)
    if off:
        e = type(e)(e.k0, e.h0 * rng.uniform(0.7, 1.05))
    from lucas_uzawa.calibration import assemble_solution
    return assemble_solution(p, e)


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10_000))
def test_z_identity_and_initial_conditions(seed):
    sol = _random_solution(seed)
    t = np.linspace(0, 150, 31)
    tr = sol.evaluate(t, with_integrals=False)
    assert np.max(np.abs(tr.h**sol.constants.eta * tr.u_form1 / tr.k - tr.z) / tr.z) <= 1e-8
    assert tr.k[0] == pytest.approx(sol.endowment.k0, rel=1e-12)
    assert tr.h[0] == pytest.approx(sol.endowment.h0, rel=1e-12)
    assert tr.u_form1[0] == pytest.approx(sol.calibration.u0, rel=1e-12)
    assert tr.u_form2[0] == pytest.approx(sol.calibration.u0, rel=1e-12)


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10_000))
def test_monotone_convergence(seed):
    sol = _random_solution(seed)
    t = np.linspace(0, 200, 81)
    z = sol.z(t)
    dist = np.abs(z - sol.constants.z_star)
    assert np.all(np.diff(dist) <= 1e-15)
    F = cf.F_at(sol.params, sol.calibration.z0, t)
    B = cf.B_at(sol.params, sol.calibration.z0, t)
    assert np.all(np.diff(F) >= 0) and np.all(np.diff(B) >= 0)
    assert np.all(F <= sol.calibration.F_star * (1 + 1e-13))


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10_000))
def test_bgp_fixed_point_constant_controls(seed):
    rng = np.random.default_rng(seed)
    p = random_feasible(rng)
    dc = derive_constants(p)
    e = bgp_endowment(p)
    cal = calibration_from_u0(p, e, dc.u_star)
    # roundoff in the jump gap grows like exp((xi - varphi)*t); keep the horizon well conditioned
    t = np.linspace(0, min(100.0, 8.0 / (dc.xi - dc.varphi)), 21)
    assert np.allclose(cf.u_form1_at(p, cal, t), dc.u_star, rtol=1e-10, atol=0)
    assert np.allclose(cf.u_form2_at(p, e, cal, t), dc.u_star, rtol=1e-10, atol=0)


def test_u_form1_long_run_limit(p1_off):
    assert p1_off.u1(400.0) == pytest.approx(0.9, abs=1e-5)
