import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from spectral_obstruction.numerics import (
    BACKENDS,
    QuadratureError,
    QuadratureRule,
    SymTridiag,
    beta_moment_ratio,
    count_below,
    eig_sym_tridiag,
    eig_sym_tridiag_below,
    fixed_gauss,
    integrate,
    moment_ratio,
    wallis,
    wallis_coefficient,
)
from spectral_obstruction.numerics.spheres import sphere_area, sphere_monomial_integral


# --- quadrature -------------------------------------------------------------

def test_integrate_constant():
    assert_allclose(integrate(lambda x: np.ones_like(x), 0.0, 1.0), 1.0, rtol=1e-15)


def test_integrate_sin_cubed():
    assert_allclose(integrate(lambda t: np.sin(t) ** 3, 0.0, np.pi / 2), 2 / 3, rtol=1e-14)


def test_integrate_gaussian_half_line():
    val = integrate(lambda x: np.exp(-x * x / 2), 0.0, 40.0)
    assert abs(val - math.sqrt(math.pi / 2)) < 1e-12


def test_integrate_full_output_reports_error():
    res = integrate(np.cos, 0.0, 3.0, full_output=True)
    assert_allclose(res.value, math.sin(3.0), atol=1e-14)
    assert res.error >= 0.0 and res.panels >= 1


def test_integrate_rejects_empty_interval():
    with pytest.raises(ValueError):
        integrate(np.sin, 1.0, 1.0)


def test_integrate_nonconvergence_carries_estimate():
    rule = QuadratureRule(node_count=4, tolerance=1e-15, max_refinement_depth=2)
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: np.sqrt(np.abs(x - 0.3)), 0.0, 1.0, rule)
    assert info.value.residual > 0
    assert abs(info.value.estimate - (0.3**1.5 + 0.7**1.5) / 1.5) < 1e-2


@pytest.mark.parametrize("n", [2, 5, 16, 32])
def test_single_panel_polynomial_exactness(n):
    rng = np.random.default_rng(n)
    coef = rng.normal(size=2 * n)
    p = np.polynomial.Polynomial(coef)
    exact = p.integ()(1.5) - p.integ()(-0.5)
    got = fixed_gauss(p, -0.5, 1.5, n)
    assert abs(got - exact) <= 10 * np.finfo(float).eps * max(1.0, np.abs(coef).sum() * 2**(2 * n))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=8),
       st.lists(st.floats(-5, 5), min_size=1, max_size=8),
       st.floats(-3, 3), st.floats(-3, 3))
def test_integrate_linear(cf, cg, alpha, beta):
    f = np.polynomial.Polynomial(cf)
    g = np.polynomial.Polynomial(cg)
    lhs = integrate(lambda x: alpha * f(x) + beta * g(x), -1.0, 2.0)
    rhs = alpha * integrate(f, -1.0, 2.0) + beta * integrate(g, -1.0, 2.0)
    tol = 1e-12 * (1 + abs(lhs)) * (1 + abs(alpha) + abs(beta))
    assert abs(lhs - rhs) <= tol


# --- rational kernels -------------------------------------------------------

@pytest.mark.parametrize("m, exact", [(0, math.pi / 2), (1, 1.0), (2, math.pi / 4), (3, 2 / 3)])
def test_wallis_small(m, exact):
    assert_allclose(wallis(m), exact, rtol=1e-15)


def test_wallis_two_step():
    assert wallis_coefficient(5) == Fraction(4, 5) * wallis_coefficient(3)


def test_wallis_recurrence_exact():
    for m in range(2, 201):
        assert m * wallis_coefficient(m) == (m - 1) * wallis_coefficient(m - 2)


def test_wallis_matches_quadrature():
    for m in (4, 7, 12):
        assert_allclose(wallis(m), integrate(lambda t: np.sin(t) ** m, 0, np.pi / 2), rtol=1e-13)


def test_beta_ratio_examples():
    assert beta_moment_ratio(4, 1) == Fraction(2, 5)
    assert moment_ratio(4, 11, 13) == Fraction(24, 27) * Fraction(26, 29)
    assert abs(float(beta_moment_ratio(4, 10**6)) - 1) < 2e-6


def _q_moment(d, j):
    # E|z|^{2j} on S^d in the (t, theta, omega) chart, up to a j-independent factor
    return integrate(lambda t: np.sin(t) ** (2 * j + 1) * np.cos(t) ** (d - 2), 0, np.pi / 2)


def test_beta_ratio_against_quadrature():
    ratio = _q_moment(4, 13) / _q_moment(4, 11)
    assert_allclose(ratio, float(moment_ratio(4, 11, 13)), rtol=1e-13)
    for d in (3, 5, 6):
        for j in (1, 4, 9):
            assert_allclose(_q_moment(d, j) / _q_moment(d, j - 1), float(beta_moment_ratio(d, j)),
                            rtol=1e-13)


@given(st.integers(2, 500), st.integers(1, 10**6))
def test_beta_ratio_in_unit_interval(d, j):
    r = beta_moment_ratio(d, j)
    assert 0 < r < 1


def test_beta_ratio_rejects_bad_args():
    with pytest.raises(ValueError):
        beta_moment_ratio(1, 1)
    with pytest.raises(ValueError):
        beta_moment_ratio(4, 0)


def test_sphere_area_and_monomials():
    assert_allclose(sphere_area(2), 4 * math.pi, rtol=1e-15)
    assert_allclose(sphere_area(1), 2 * math.pi, rtol=1e-15)
    # on S^2: int x^2 = 4 pi / 3
    assert_allclose(sphere_monomial_integral((2, 0, 0)), 4 * math.pi / 3, rtol=1e-14)
    assert sphere_monomial_integral((1, 0, 0)) == 0.0


# --- tridiagonal eigensolver ------------------------------------------------

def test_tridiag_diagonal():
    m = SymTridiag([1.0, 2.0, 3.0], [0.0, 0.0])
    assert_allclose(eig_sym_tridiag(m, 3), [1, 2, 3], atol=1e-15)


def test_tridiag_dirichlet_laplacian():
    m = SymTridiag([2.0, 2.0, 2.0], [-1.0, -1.0])
    expected = 2 - 2 * np.cos(np.arange(1, 4) * np.pi / 4)
    assert_allclose(eig_sym_tridiag(m, 3), expected, atol=1e-14)


def test_tridiag_shape_validation():
    with pytest.raises(ValueError):
        SymTridiag([1.0, 2.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        SymTridiag([], [])
    with pytest.raises(ValueError):
        eig_sym_tridiag(SymTridiag([1.0, 2.0], [0.5]), 3)


def _charpoly_count(d, e, x):
    # sign changes of the leading principal minors, evaluated at 60 digits
    with mpmath.workdps(60):
        x = mpmath.mpf(x)
        p_prev, p = mpmath.mpf(1), d[0] - x
        neg = int(p < 0)
        for i in range(1, len(d)):
            p_prev, p = p, (d[i] - x) * p - mpmath.mpf(e[i - 1]) ** 2 * p_prev
            if (p < 0) != (p_prev < 0):
                neg += 1
        return neg


def _oracle_eigs(d, e, count):
    lo = min(d) - 2 * max(abs(v) for v in e) - 1
    hi = max(d) + 2 * max(abs(v) for v in e) + 1
    out = []
    for k in range(count):
        a, b = lo, hi
        while b - a > 1e-13:
            mid = 0.5 * (a + b)
            if _charpoly_count(d, e, mid) > k:
                b = mid
            else:
                a = mid
        out.append(0.5 * (a + b))
    return np.array(out)


def test_tridiag_random_matches_charpoly_oracle():
    rng = np.random.default_rng(7)
    d = rng.normal(size=50)
    e = rng.normal(size=49)
    m = SymTridiag(d, e)
    got = eig_sym_tridiag(m, 12)
    assert_allclose(got, _oracle_eigs(list(d), list(e), 12), atol=1e-10)


@pytest.mark.parametrize("backend", sorted(BACKENDS))
def test_tridiag_random_matches_dense(backend):
    rng = np.random.default_rng(3)
    for n in (1, 2, 17, 200):
        m = SymTridiag(rng.normal(size=n), rng.normal(size=n - 1))
        got = eig_sym_tridiag(m, n, backend=backend)
        assert np.all(np.diff(got) >= 0)
        assert_allclose(got, np.linalg.eigvalsh(m.dense()), atol=1e-12 * m.norm())


def test_backends_agree():
    if len(BACKENDS) < 2:
        pytest.skip("compiled kernel not built")
    rng = np.random.default_rng(11)
    m = SymTridiag(rng.uniform(0, 4, 500), rng.normal(size=499))
    a = eig_sym_tridiag(m, 60, backend="compiled")
    b = eig_sym_tridiag(m, 60, backend="python")
    assert_allclose(a, b, atol=1e-12 * m.norm())
    assert count_below(m, 1.0, "compiled") == count_below(m, 1.0, "python")


def test_tridiag_clustered_values():
    # Wilkinson W21+: close pairs at the top of the spectrum
    n = 21
    d = np.abs(np.arange(n) - 10).astype(float)
    m = SymTridiag(d, np.ones(n - 1))
    assert_allclose(eig_sym_tridiag(m, n), np.linalg.eigvalsh(m.dense()), atol=1e-12 * m.norm())


def test_tridiag_below():
    m = SymTridiag([2.0] * 10, [-1.0] * 9)
    exact = 2 - 2 * np.cos(np.arange(1, 11) * np.pi / 11)
    got = eig_sym_tridiag_below(m, 1.0)
    assert_allclose(got, exact[exact < 1.0], atol=1e-14)
    assert eig_sym_tridiag_below(m, -1.0).size == 0
