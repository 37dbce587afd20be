import itertools
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from spectral_obstruction import sphere_cex as S


# --- oracles ---------------------------------------------------------------------

def _Q_mp(d, j):
    # E|z|^{2j} up to a j-independent constant, in the t-chart
    return mpmath.quad(lambda t: mpmath.sin(t) ** (2 * j + 1) * mpmath.cos(t) ** (d - 2),
                       [0, mpmath.pi / 2])


def _eta_mp(d, k):
    beta = (k * k + k * (k + d - 1)) / mpmath.mpf(2 * k * (k + d - 1)) * _Q_mp(d, k + 2) / _Q_mp(d, k)
    return beta - mpmath.mpf(25) / (12 * (d - 1))


def _rayleigh_mp(d, k, eps):
    # |grad Re(z^k)|^2 and Re(z^k)^2 integrated directly in (t, theta); theta-means are 1/2
    s, c = mpmath.sin, mpmath.cos

    def a(t):
        return s(t) * mpmath.sqrt(1 + eps * s(t) ** 4)

    with mpmath.workdps(30):
        return _rayleigh_ratio(a, s, c, d, k)


def _rayleigh_ratio(a, s, c, d, k):
    num = mpmath.quad(lambda t: k * k * (s(t) ** (2 * k - 2) * c(t) ** 2 + s(t) ** (2 * k) / a(t) ** 2)
                      * a(t) * c(t) ** (d - 2), [0, mpmath.pi / 4, mpmath.pi / 2])
    den = mpmath.quad(lambda t: s(t) ** (2 * k) * a(t) * c(t) ** (d - 2),
                      [0, mpmath.pi / 4, mpmath.pi / 2])
    return float(num / den)


# --- curvature ---------------------------------------------------------------------

def test_f_at_zero():
    assert S.f_curvature(0.0, 0.3) == 0.0


def test_f_max_at_eps_zero():
    q = np.linspace(0, 1, 1_000_001)
    vals = S.f_curvature(q, 0.0)
    i = np.argmax(vals)
    assert abs(q[i] - 5 / 12) < 1e-6
    assert_allclose(vals[i], 25 / 12, rtol=1e-12)


def test_sos_identity_exact():
    assert all(v == 0 for v in S.sos_residual().values())


@settings(max_examples=200)
@given(st.floats(0, 1), st.floats(0, 10))
def test_f_bounded(q, eps):
    assert S.f_curvature(q, eps) <= 25 / 12 + 1e-14


def test_closed_form_fiber_dominates():
    t = S.default_grid()
    assert np.all(S.frame_closed_form(4, 0.1, t).R_S >= 3)


def test_rho_eps_exact_and_float():
    assert S.rho_eps(4, Fraction(1, 20)) == Fraction(3) - Fraction(25, 240)
    assert_allclose(S.rho_eps(4, 0.05), 3 - 25 * 0.05 / 12, rtol=1e-16)


def test_profile_derivatives_match_finite_differences():
    prof = S.perturbed_profile(0.3)
    t = np.linspace(0.1, 1.4, 13)
    h = 1e-5
    v, d1, d2 = prof(t)
    assert_allclose(d1, (prof.value(t + h) - prof.value(t - h)) / (2 * h), rtol=1e-8)
    assert_allclose(d2, (prof.first_derivative(t + h) - prof.first_derivative(t - h)) / (2 * h),
                    rtol=1e-7, atol=1e-9)
    assert_allclose(prof.unit_gap(t), 1 - d1**2, rtol=1e-12, atol=1e-15)


# --- choice of k and eps ------------------------------------------------------------

def test_eta_sign_change_d4():
    assert S.beta_eta(4, 10).eta < 0
    assert S.beta_eta(4, 11).eta > 0


@pytest.mark.parametrize("d, k", [(4, 10), (4, 11), (5, 6), (5, 7), (6, 3)])
def test_eta_against_quadrature(d, k):
    assert_allclose(float(S.beta_eta(d, k).eta), float(_eta_mp(d, k)), rtol=1e-12, atol=1e-14)


def test_beta_limit_and_range():
    assert abs(float(S.beta_eta(4, 10_000).beta) - 1) < 1e-3
    for d in range(2, 9):
        for k in range(1, 40):
            assert 0 < S.beta_eta(d, k).beta < 1


@pytest.mark.parametrize("d, expected", [(4, 11), (5, 7)])
def test_choose_k(d, expected):
    k = S.choose_k(d)
    assert k == expected
    # minimality, checked against the independent quadrature scan
    assert _eta_mp(d, k) > 0 and _eta_mp(d, k - 1) <= 0


def test_choose_k_rejects_small_d():
    with pytest.raises(ValueError):
        S.choose_k(3)


def test_eps_zero():
    assert S.eps_zero_exact(4, 11) == Fraction(24) / (65 + Fraction(25, 36) * 154)
    assert_allclose(S.eps_zero(4, 11), 0.13957996768982228, rtol=1e-15)
    expected = Fraction(2 * 7 + 3) / (Fraction(6 * 10, 2) + Fraction(25, 48) * 7 * 11)
    assert S.eps_zero_exact(5, 7) == expected
    for d in range(4, 9):
        assert S.eps_zero(d, S.choose_k(d)) > 0
    with pytest.raises(ValueError):
        S.eps_zero(4, 10)


def test_low_harmonic_bound():
    eps = S.eps_zero(4, 11) / 8
    chk = S.low_harmonic_check(4, 11, eps)
    e = Fraction(eps)
    lhs = (1 + e / 2) * 10 * 13
    rhs = (3 - Fraction(25, 12) * e) / 3 * 154
    assert lhs < rhs and chk.passed
    assert_allclose(chk.margin, float(rhs - lhs), rtol=1e-15)


# --- Rayleigh quotient of Re(z^k) -----------------------------------------------------

@pytest.mark.parametrize("d, k", [(4, 11), (4, 3), (5, 7), (6, 12), (8, 15)])
def test_rayleigh_at_zero_is_round_eigenvalue(d, k):
    assert_allclose(S.rayleigh_fk(d, k, 0.0), k * (k + d - 1), rtol=1e-10)


@pytest.mark.parametrize("divisor", [4, 8])
def test_rayleigh_against_mp_oracle(divisor):
    eps = S.eps_zero(4, 11) / divisor
    assert_allclose(S.rayleigh_fk(4, 11, eps), _rayleigh_mp(4, 11, eps), rtol=1e-11)


def test_rayleigh_below_threshold_at_working_eps():
    eps = S.eps_zero(4, 11) / 8
    assert S.rayleigh_fk(4, 11, eps) < S.rho_eps(4, eps) / 3 * 154


@pytest.mark.parametrize("eps", [0.01, 0.05])
def test_rayleigh_below_phi(eps):
    assert S.rayleigh_fk(4, 11, eps) <= S.phi(4, 11, eps)


def test_phi_at_zero_and_slope():
    assert_allclose(S.phi(4, 11, 0.0), 154, rtol=1e-15)
    h = 1e-6
    fd = (S.phi(4, 11, h) - S.phi(4, 11, -h)) / (2 * h)
    assert_allclose(fd, S.phi_prime_at_zero(4, 11), rtol=1e-4)
    assert S.phi(4, 11, 1e-3) < S.phi(4, 11, 0.0)


def test_phi_rejects_nonpositive_denominator():
    with pytest.raises(ValueError):
        S.phi(4, 11, 1e4)


# --- harmonics and K ---------------------------------------------------------------

def _monomial_count(nvars, degree):
    return sum(1 for e in itertools.product(range(degree + 1), repeat=nvars) if sum(e) == degree)


def test_harmonic_dims():
    assert S.harmonic_dim(4, 0) == 1
    assert S.harmonic_dim(4, 1) == 5
    for l in range(1, 12):
        assert S.harmonic_dim(4, l) == (2 * l + 3) * (l + 1) * (l + 2) // 6


def test_K_index_brute_force():
    assert S.K_index(4, 11) == 1717
    # polynomials of degree <= L restricted to S^d: degree-L plus degree-(L-1) monomials
    L = 10
    assert S.K_index(4, 11) == _monomial_count(5, L) + _monomial_count(5, L - 1) + 1


def test_lambda_can():
    assert S.lambda_can(4, 3.0, 1) == (4.0, 5)
    assert S.lambda_can(4, 3.0, 11) == (154.0, S.harmonic_dim(4, 11))
    rho = 2.7
    assert_allclose(S.lambda_can(4, rho, 6)[0], rho / 3 * S.lambda_can(4, 3.0, 6)[0], rtol=1e-15)
    with pytest.raises(ValueError):
        S.lambda_can(4, 0.0, 1)


# --- orthogonality -----------------------------------------------------------------

@pytest.mark.parametrize("mono", [
    S.Monomial(0, 0, (0, 0, 0)),
    S.Monomial(1, 0, (0, 0, 0)),
    S.Monomial(2, 0, (0, 0, 0)),
    S.Monomial(0, 2, (1, 0, 0)),
    S.Monomial(10, 0, (0, 0, 0)),
])
def test_orthogonality_examples(mono):
    res = S.orthogonality_check(4, 11, 0.05, [mono])
    assert res.max <= 1e-10


def test_orthogonality_detects_nonorthogonal():
    # Re(z^11) is not orthogonal to itself; z^11 is a degree-k witness
    res = S.orthogonality_check(4, 11, 0.05, [S.Monomial(11, 0, (0, 0, 0))])
    assert res.l2_max > 0.5


def test_witness_set_shape():
    ws = S.witness_set(4, 11)
    assert len(ws) == sum(_monomial_count(5, g) for g in range(5)) + 10
    assert all(m.degree < 11 for m in ws)


# --- pipeline --------------------------------------------------------------------------

def test_verify_equality_case_fails():
    rep = S.verify_sphere(S.SphereParams(4, 11, 0.0))
    assert not rep.passed
    assert rep.failing_stage == "rayleigh_fk < lambda_K_can"
    assert any("no counterexample" in n for n in rep.notes)


def test_verify_d5_certificate():
    rep = S.verify_sphere(S.SphereParams(5))
    assert rep.params.k == 7
    assert rep.passed
    assert all(c.margin > 0 for c in rep.checks if c.strict)
    assert rep.K == S.K_index(5, 7)


def test_params_validation():
    with pytest.raises(ValueError):
        S.SphereParams(3).resolved()
    with pytest.raises(ValueError):
        S.SphereParams(4, 11, -0.1).resolved()
