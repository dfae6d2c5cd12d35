import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hardyring.constants import bubble_integrals, half_ratio
from hardyring.energy import (
    LambdaState, alpha1_iota2, alpha_beta, beta1_helper, f3_profile_hessian, f5_hessian_det_sign,
    f5_profile_hessian, f5_reduced_matrix, f5_stationarity_residuals, f_k_eval, f_value,
    iota1, iota3, iota3_terms, iota_ring, lambda_profile, lambda_profile_f3, lambda_profile_f5,
    normalized_value, nu1, nu2, nu2_derivative, nu2_iota3, nu_ring, nu_ring_derivative,
    nu_ring_direct, psi, psi_tilde,
)
from hardyring.errors import DomainError, ProfileUndefinedError
from hardyring.green import coefficient, ring_points
from hardyring.solver import find_tstar

# mpmath references
PSI_N7_RING3 = 58343855.12719959331
PSI_TILDE_N7 = -3055069797.334899797
F3_PROFILE_N7_06 = (0.179489096635107856690200283256, 0.273447734557844079679250097728)
F5_PROFILE_N7_03 = (0.0570330249231371031119402930314, 0.25940353965121609369827115613,
                    0.11211666197025222182008314276)
ALPHA1_N7_08 = 10.1364210484042694992377949921
IOTA2_N7_08 = 3292.32446697178664536252118925
T1STAR_N7 = 0.403927087548145836241377264009
T2STAR_N7 = 0.716754976357601663831424086124


def _ring_lambda(k, lam):
    if k == 5:
        return [lam[0], lam[1], lam[2], lam[1], lam[2]]
    return [lam[0]] + [lam[1]] * k


def test_lambda_state_validation():
    s = LambdaState(0.2, 0.3)
    assert s.as_array().tolist() == [0.2, 0.3]
    assert s.within(0.1) and not s.within(0.25)
    with pytest.raises(DomainError):
        LambdaState(0.2, -1.0)
    with pytest.raises(DomainError):
        f_k_eval(3, (0.2, 0.3, 0.1), 0.5, 7)
    with pytest.raises(DomainError):
        f_k_eval(6, (0.2, 0.3), 0.5, 7)


def test_psi_center_only():
    N = 7
    b1, b2 = bubble_integrals(N)
    lam0 = 0.37
    expected = b1 * lam0 ** (N - 2) - b2 * (N - 2) / 2 * math.log(lam0)
    assert psi([lam0], np.zeros((0, N)), N) == pytest.approx(expected, rel=1e-14)


def test_psi_spot_values():
    assert psi([1, 1, 1, 1], ring_points(3, 0.6, 7), 7) == pytest.approx(PSI_N7_RING3, rel=1e-13)
    assert psi_tilde([1, 1, 2, 1, 2], ring_points(4, 0.3, 7), 7) == pytest.approx(PSI_TILDE_N7, rel=1e-13)


def test_psi_rejects_bad_points():
    N = 7
    with pytest.raises(DomainError):
        psi([1, 1], np.zeros((1, N)), N)
    pts = ring_points(2, 0.5, N)
    with pytest.raises(DomainError):
        psi([1, 1, 1], np.vstack([pts[0], pts[0]]), N)
    with pytest.raises(DomainError):
        psi([1, 1], pts, N)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 4, 5]), st.integers(7, 12), st.floats(0.1, 0.9),
       st.lists(st.floats(0.05, 1.5), min_size=3, max_size=3))
def test_reductions_equal_general_energy(k, N, t, lam):
    lam = lam[:3] if k == 5 else lam[:2]
    f = f_value(k, lam, t, N)
    if k == 5:
        g = psi_tilde(_ring_lambda(5, lam), ring_points(4, t, N), N)
    else:
        g = psi(_ring_lambda(k, lam), ring_points(k, t, N), N)
    # both sides sum terms of mixed signs; compare against the term magnitudes
    b1, b2 = bubble_integrals(N)
    scale = abs(f) + b1 * coefficient("hself", t, N)[0] * max(lam) ** (N - 2) + b2
    assert abs(f - g) <= 1e-12 * scale


def test_alternating_center_coupling_cancels():
    N, t = 7, 0.4
    lam = [0.3, 0.5, 0.5, 0.5, 0.5]
    b1, b2 = bubble_integrals(N)
    full = psi_tilde(lam, ring_points(4, t, N), N)
    g3 = coefficient("gamma3", t, N)[0]
    g4 = coefficient("gamma4", t, N)[0]
    s = 0.5 ** 2.5
    expected = b1 * (0.3**5 + 4 * g3 * s * s + 8 * g4 * s * s) - b2 * 2.5 * math.log(0.3 * 0.5**4)
    assert full == pytest.approx(expected, rel=1e-12)


def _fd_check(k, lam, t, N):
    x = np.append(lam, t)
    ev = f_k_eval(k, lam, t, N, normalized=True)
    n = len(x)
    g_fd = np.empty(n)
    H_fd = np.empty((n, n))
    for i in range(n):
        h = 1e-5 * max(abs(x[i]), 1e-2)
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        ep = f_k_eval(k, xp[:-1], xp[-1], N, normalized=True)
        em = f_k_eval(k, xm[:-1], xm[-1], N, normalized=True)
        g_fd[i] = (ep.value - em.value) / (2 * h)
        H_fd[:, i] = (ep.grad - em.grad) / (2 * h)
    return ev, g_fd, H_fd


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_gradient_and_hessian_vs_finite_differences(k):
    rng = np.random.default_rng(100 + k)
    for _ in range(50):
        N = int(rng.integers(7, 13))
        t = rng.uniform(0.2, 0.85)
        lam = rng.uniform(0.1, 0.8, 3 if k == 5 else 2)
        ev, g_fd, H_fd = _fd_check(k, lam, t, N)
        assert np.linalg.norm(g_fd - ev.grad) <= 1e-6 * np.linalg.norm(ev.grad)
        assert np.linalg.norm(H_fd - ev.hess) <= 1e-6 * np.linalg.norm(ev.hess)
        assert np.array_equal(ev.hess, ev.hess.T)


def test_raw_and_normalized_differ_by_b2():
    N = 9
    b2 = bubble_integrals(N)[1]
    raw = f_k_eval(3, (0.3, 0.4), 0.6, N)
    nrm = f_k_eval(3, (0.3, 0.4), 0.6, N, normalized=True)
    assert raw.value == pytest.approx(b2 * nrm.value, rel=1e-14)
    assert np.allclose(raw.grad, b2 * nrm.grad, rtol=1e-14)
    assert nrm.value == pytest.approx(normalized_value(3, (0.3, 0.4), 0.6, N), rel=1e-14)


def test_f3_profile_reference():
    l0, l1 = lambda_profile_f3(0.6, 7)
    assert l0 == pytest.approx(F3_PROFILE_N7_06[0], rel=1e-13)
    assert l1 == pytest.approx(F3_PROFILE_N7_06[1], rel=1e-13)


@pytest.mark.parametrize("k", [2, 3, 4])
@pytest.mark.parametrize("N", [7, 10, 15])
def test_ring_profile_is_stationary(k, N):
    t0 = find_tstar({2: "gamma3", 3: "gamma1", 4: "gamma2"}[k], N).t
    for t in np.linspace(t0 + 0.01, 0.95, 7):
        lam = lambda_profile(k, t, N)
        ev = f_k_eval(k, lam, t, N, normalized=True)
        # gradient of f/b2 in s = lambda^((N-2)/2) is O(1) per entry
        assert np.max(np.abs(ev.grad_s[:2] * np.power(lam, 0.5 * (N - 2)))) < 1e-12


def test_alpha_matches_plain_form():
    N = 9
    for t in (0.55, 0.7, 0.9):
        tau = coefficient("tau1", t, N)[0]
        g = coefficient("gamma1", t, N)[0]
        alpha, beta = alpha_beta(3, t, N)
        assert alpha == pytest.approx(-tau + math.sqrt(tau * tau + g), rel=1e-9)
        assert beta == pytest.approx(g + tau * alpha, rel=1e-14)


def test_alpha_vanishes_at_tstar():
    N = 7
    ts = find_tstar("gamma1", N).t
    a_near, _ = alpha_beta(3, ts + 1e-9, N)
    assert 0 < a_near < 1e-6
    l0, l1 = lambda_profile(3, ts + 1e-9, N)
    assert l0 < 1e-2 and l1 > 0.1


def test_profile_undefined_below_tstar():
    with pytest.raises(ProfileUndefinedError):
        lambda_profile_f3(0.4, 7)
    with pytest.raises(ProfileUndefinedError):
        iota1(0.4, 7)
    with pytest.raises(DomainError):
        alpha_beta(5, 0.5, 7)


@pytest.mark.parametrize("N", [7, 9])
def test_f3_hessian_general_simplified_and_chain_rule(N):
    t0 = find_tstar("gamma1", N).t
    for t in np.linspace(t0 + 0.02, 0.95, 6):
        gen = f3_profile_hessian(t, N)
        simp = f3_profile_hessian(t, N, simplified=True)
        chain = f_k_eval(3, lambda_profile(3, t, N), t, N).hess[:2, :2]
        assert np.allclose(gen, simp, rtol=1e-10, atol=0)
        assert np.allclose(gen, chain, rtol=1e-10, atol=0)
        assert np.all(np.linalg.eigvalsh(gen) > 0)


def test_nu1_closed_form_vs_direct():
    rng = np.random.default_rng(5)
    for _ in range(30):
        N = int(rng.integers(7, 16))
        t0 = find_tstar("gamma1", N).t
        t = rng.uniform(t0 + 1e-3, 0.99)
        assert nu1(t, N) == pytest.approx(nu_ring_direct(3, t, N), rel=1e-10)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_nu_diverges_at_both_ends(k):
    N = 7
    t0 = find_tstar({2: "gamma3", 3: "gamma1", 4: "gamma2"}[k], N).t
    near_lo = [nu_ring(k, t0 + 10.0**-j, N) for j in (2, 4, 6, 8)]
    near_hi = [nu_ring(k, 1 - 10.0**-j, N) for j in (2, 3, 4, 5)]
    assert all(a > b for a, b in zip(near_lo, near_lo[1:]))
    assert all(a < b for a, b in zip(near_hi, near_hi[1:]))


@pytest.mark.parametrize("k", [2, 3, 4])
def test_nu_derivative_matches_iota(k):
    N = 8
    t0 = find_tstar({2: "gamma3", 3: "gamma1", 4: "gamma2"}[k], N).t
    for t in np.linspace(t0 + 0.03, 0.9, 5):
        h = 1e-6
        fd = (nu_ring(k, t + h, N) - nu_ring(k, t - h, N)) / (2 * h)
        assert fd == pytest.approx(nu_ring_derivative(k, t, N), rel=1e-5)
        assert np.sign(fd) == np.sign(iota_ring(k, t, N))


def test_alpha1_iota2_reference():
    a, i2 = alpha1_iota2(0.8, 7)
    assert a == pytest.approx(ALPHA1_N7_08, rel=1e-13)
    assert i2 == pytest.approx(IOTA2_N7_08, rel=1e-12)
    g = coefficient("gamma2", 0.8, 7)[0]
    tau = coefficient("tau1", 0.8, 7)[0]
    assert beta1_helper(0.8, 7) == pytest.approx(g + tau * a, rel=1e-14)


def test_iota2_at_tstar_is_gamma2_prime():
    N = 7
    ts = find_tstar("gamma2", N).t
    a, i2 = alpha1_iota2(ts + 1e-12, N)
    assert a < 1e-9
    assert i2 == pytest.approx(coefficient("gamma2", ts, N)[1], rel=1e-6)
    with pytest.raises(ProfileUndefinedError):
        alpha1_iota2(ts - 1e-3, N)


def test_scaled_iota_has_same_sign():
    for N in (7, 12, 15):
        t0 = find_tstar("gamma1", N).t
        ts = np.linspace(t0 + 1e-3, 0.99, 200)
        assert np.array_equal(np.sign(iota1(ts, N)), np.sign(iota1(ts, N, scaled=True)))
    ts = np.linspace(0.05, 0.95, 200)
    assert np.array_equal(np.sign(iota3(ts, 9)), np.sign(iota3(ts, 9, scaled=True)))


def test_f5_profile_reference_and_residuals():
    lam = lambda_profile_f5(0.3, 7)
    assert np.allclose(lam, F5_PROFILE_N7_03, rtol=1e-13)
    assert np.max(np.abs(f5_stationarity_residuals(lam, 0.3, 7))) < 1e-10


@pytest.mark.parametrize("N", [7, 8, 12])
def test_f5_profile_stationary_on_both_domains(N):
    t1 = find_tstar("gamma3", N).t
    t2 = find_tstar("gamma3-2tau1sq", N, 0.5).t
    for t in list(np.linspace(0.05, t1 - 1e-3, 5)) + list(np.linspace(t2 + 1e-3, 0.98, 5)):
        lam = lambda_profile_f5(t, N)
        assert min(lam) > 0
        assert np.max(np.abs(f5_stationarity_residuals(lam, t, N))) < 1e-10
        assert nu2(t, N) == pytest.approx(f_value(5, lam, t, N), rel=1e-14)


def test_f5_profile_undefined_between_roots():
    t = 0.5 * (T1STAR_N7 + T2STAR_N7)
    with pytest.raises(ProfileUndefinedError):
        lambda_profile_f5(t, 7)


def test_f5_sign_regions_n7():
    t1 = find_tstar("gamma3", 7).t
    t2 = find_tstar("gamma3-2tau1sq", 7, 0.5).t
    assert t1 == pytest.approx(T1STAR_N7, rel=1e-14)
    assert t2 == pytest.approx(T2STAR_N7, rel=1e-14)
    g3, tau = coefficient("gamma3", 0.2, 7)[0], coefficient("tau1", 0.2, 7)[0]
    assert g3 < 0 and g3 - 2 * tau * tau < 0


def test_iota3_endpoint_signs():
    N = 7
    t1 = find_tstar("gamma3", N).t
    small = [iota3(t, N) for t in (1e-2, 1e-3, 1e-4)]
    assert all(v < 0 for v in small)
    assert small[0] > small[1] > small[2]
    assert iota3(t1, N) > 0


def test_nu2_derivative_sign_matches_iota3():
    N = 7
    t1 = find_tstar("gamma3", N).t
    for t in np.linspace(0.05, t1 - 1e-3, 25):
        h = 1e-7
        fd = (nu2(t + h, N) - nu2(t - h, N)) / (2 * h)
        assert np.sign(fd) == np.sign(iota3(t, N))
        assert fd == pytest.approx(nu2_derivative(t, N), rel=1e-5)
    v, i3 = nu2_iota3(0.2, N)
    assert v == nu2(0.2, N) and i3 == iota3(0.2, N)


def test_nu2_derivative_closed_relation():
    # nu2' = 2 b1 c iota3 / (gamma3 (gamma3 - 2 tau^2) (gamma3 + 2 gamma4))
    N = 9
    b1, _ = bubble_integrals(N)
    c = half_ratio(N)
    for t in (0.2, 0.3, 0.85):
        g3 = coefficient("gamma3", t, N)[0]
        g4 = coefficient("gamma4", t, N)[0]
        tau = coefficient("tau1", t, N)[0]
        expected = 2 * b1 * c * iota3(t, N) / (g3 * (g3 - 2 * tau * tau) * (g3 + 2 * g4))
        assert nu2_derivative(t, N) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("N", [7, 10])
def test_f5_hessians_agree_and_det_sign(N):
    t1 = find_tstar("gamma3", N).t
    t2 = find_tstar("gamma3-2tau1sq", N, 0.5).t
    for t in list(np.linspace(0.1, t1 - 1e-3, 4)) + list(np.linspace(t2 + 1e-3, 0.95, 4)):
        lam = lambda_profile_f5(t, N)
        gen = f5_profile_hessian(t, N)
        assert np.allclose(gen, f5_profile_hessian(t, N, simplified=True), rtol=1e-9, atol=0)
        assert np.allclose(gen, f_k_eval(5, lam, t, N).hess[:3, :3], rtol=1e-10, atol=0)
        det = np.linalg.det(gen)
        assert det != 0.0
        g3 = coefficient("gamma3", t, N)[0]
        assert f5_hessian_det_sign(t, N) == np.sign(det) == np.sign(g3)
        assert f5_hessian_det_sign(t, N) == (-1 if t < t1 else 1)


def test_f5_reduced_matrix_is_row_scaled_hessian():
    for N, t in ((7, 0.25), (8, 0.25), (9, 0.9)):
        lam = lambda_profile_f5(t, N)
        H = f_k_eval(5, lam, t, N).hess[:3, :3]
        ratio = f5_reduced_matrix(t, N) / H
        for row in ratio:
            assert np.all(row > 0)
            assert np.allclose(row, row[0], rtol=1e-9)


def test_iota3_terms_sum():
    a, b, c = iota3_terms(0.3, 7)
    assert a + b + c == pytest.approx(iota3(0.3, 7), rel=1e-15)
