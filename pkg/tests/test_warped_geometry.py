import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from spectral_obstruction import gauss_cex, sphere_cex
from spectral_obstruction.warped_geometry import (
    Chart,
    DomainError,
    FiberSpec,
    MultiplyWarpedMetric,
    RadialWeightedManifold,
    WarpProfile,
    bakry_emery_frame,
    constant_profile,
    cylinder_metric,
    fd_ricci_oracle,
    frame_eigenvalues,
    identity_profile,
    perturbed_s4_chart,
    ricci_frame,
    ricci_lower_bound,
    round_sphere_metric,
    sin_profile,
    warped_s3_chart,
)


def _quadratic(center=0.0, domain=(0.0, np.inf)):
    return WarpProfile(domain, lambda r: 0.5 * (r - center) ** 2, lambda r: r - center,
                       np.ones_like)


def _zero(domain=(0.0, np.inf)):
    return WarpProfile(domain, np.zeros_like, np.zeros_like, np.zeros_like)


# --- frame Ricci --------------------------------------------------------------

def test_round_s4_frame():
    fr = ricci_frame(round_sphere_metric(4), np.pi / 4)
    assert_allclose([fr.base, *fr.fibers], [3, 3, 3], atol=1e-14)


@pytest.mark.parametrize("d", [3, 4, 5, 7])
def test_round_sphere_frame_on_grid(d):
    grid = np.linspace(1e-4, np.pi / 2 - 1e-4, 10_000)
    fr = ricci_frame(round_sphere_metric(d), grid)
    for comp in (fr.base, *fr.fibers):
        assert np.max(np.abs(comp - (d - 1))) <= 1e-12


def test_cylinder_frame():
    fr = ricci_frame(cylinder_metric(4, np.sqrt(2)), 1.0)
    assert_allclose(fr.base, 0.0, atol=1e-15)
    assert_allclose(fr.fibers[0], 1.0, rtol=1e-15)


def test_perturbed_frame_matches_closed_form():
    t = np.pi / 3
    fr = ricci_frame(sphere_cex.perturbed_metric(4, 0.1), t)
    cf = sphere_cex.frame_closed_form(4, 0.1, t)
    assert_allclose([fr.base, fr.fibers[0], fr.fibers[1]], [cf.R_t, cf.R_theta, cf.R_S],
                    rtol=1e-10)


def test_perturbed_fiber_at_least_d_minus_one():
    grid = sphere_cex.default_grid()
    for eps in (0.01, 0.05, 0.1, 0.5):
        fr = ricci_frame(sphere_cex.perturbed_metric(4, eps), grid)
        assert np.all(fr.fibers[1] >= 3 - 1e-12)


def test_frame_rejects_endpoints():
    m = round_sphere_metric(4)
    with pytest.raises(DomainError):
        ricci_frame(m, 0.0)
    with pytest.raises(DomainError):
        ricci_frame(m, np.array([0.3, np.pi / 2]))


def test_metric_validation():
    with pytest.raises(ValueError):
        FiberSpec(0, 0.0)
    with pytest.raises(ValueError):
        MultiplyWarpedMetric((0.0, 1.0), ())
    with pytest.raises(ValueError):
        MultiplyWarpedMetric((0.0, 1.0), ((FiberSpec.sphere(2), sin_profile()),))
    assert FiberSpec.sphere(1).einstein_constant == 0.0
    assert round_sphere_metric(6).dim == 6


# --- Bakry-Emery ---------------------------------------------------------------

def test_bakry_emery_flat():
    man = RadialWeightedManifold(4, identity_profile(), _zero())
    be = bakry_emery_frame(man, 1.0)
    assert_allclose([be.radial, be.tangential], [0, 0], atol=1e-15)


def test_bakry_emery_gaussian():
    man = RadialWeightedManifold(4, identity_profile(), _quadratic())
    be = bakry_emery_frame(man, 1.0)
    assert_allclose([be.radial, be.tangential], [1, 1], atol=1e-15)


def test_bakry_emery_weighted_cylinder():
    p = gauss_cex.TorpedoParams(4, 0.05)
    man = RadialWeightedManifold(4, constant_profile(np.sqrt(2), (0.0, np.inf)),
                                 _quadratic(center=p.B))
    be = bakry_emery_frame(man, p.B + 1)
    assert_allclose([be.radial, be.tangential], [1, 1], rtol=1e-15)


def test_bakry_emery_rejects_origin():
    man = RadialWeightedManifold(4, identity_profile(), _zero())
    with pytest.raises(DomainError):
        bakry_emery_frame(man, np.array([0.0, 1.0]))


def test_torpedo_tangential_chain():
    # (d-2)(1 - rho'^2) >= rho^2 pointwise: the fiber term dominates 1
    p = gauss_cex.TorpedoParams(4, 0.05)
    prof = gauss_cex.torpedo_profile(p)
    grid = gauss_cex.default_grid(p)
    rho = prof.value(grid)
    assert np.all((p.d - 2) * prof.unit_gap(grid) >= rho**2 * (1 - 1e-12))


# --- lower bounds ----------------------------------------------------------------

def test_lower_bound_round_sphere():
    lb = ricci_lower_bound(round_sphere_metric(4), np.linspace(0.1, 1.4, 50))
    assert_allclose(lb.rho_star, 3.0, atol=1e-13)


def test_lower_bound_perturbed():
    eps = 0.05
    lb = ricci_lower_bound(sphere_cex.perturbed_metric(4, eps), sphere_cex.default_grid(10_000))
    assert lb.rho_star >= 3 - 25 * eps / 12 - 1e-9
    assert 0 < lb.argmin < np.pi / 2


def test_lower_bound_empty_grid():
    with pytest.raises(ValueError):
        ricci_lower_bound(round_sphere_metric(4), [])


@settings(max_examples=15, deadline=None)
@given(st.integers(10, 300), st.floats(0.0, 0.5))
def test_lower_bound_nonincreasing_under_refinement(n, eps):
    m = sphere_cex.perturbed_metric(4, eps)
    coarse = np.linspace(1e-3, np.pi / 2 - 1e-3, n + 1)
    fine = np.linspace(1e-3, np.pi / 2 - 1e-3, 2 * n + 1)  # contains the coarse grid
    assert ricci_lower_bound(m, fine).rho_star <= ricci_lower_bound(m, coarse).rho_star


def test_continuity_defects_reported():
    p = gauss_cex.TorpedoParams(4, 0.05)
    for _, dv, dd in gauss_cex.torpedo_profile(p).continuity_defects():
        assert dv < 1e-8 and dd < 1e-8


# --- finite-difference oracle ----------------------------------------------------

def test_oracle_flat_metric():
    ch = Chart(lambda x: np.eye(3), 3)
    assert_allclose(fd_ricci_oracle(ch, np.array([0.3, -1.0, 2.0])), np.zeros((3, 3)), atol=1e-8)


def test_oracle_round_s4_einstein():
    ch = perturbed_s4_chart(0.0)
    x = np.array([np.pi / 4, 0.0, np.pi / 2, 0.0])
    assert_allclose(fd_ricci_oracle(ch, x), 3 * ch.metric(x), atol=1e-7)


def test_oracle_matches_frame_for_perturbed_sphere():
    ch = perturbed_s4_chart(0.1)
    x = np.array([0.7, 1.3, 1.1, 0.4])
    ev = frame_eigenvalues(fd_ricci_oracle(ch, x), ch.metric(x))
    fr = ricci_frame(sphere_cex.perturbed_metric(4, 0.1), x[0])
    expected = np.sort([fr.base, fr.fibers[0], fr.fibers[1], fr.fibers[1]])
    assert_allclose(ev, expected, rtol=1e-6)


def test_oracle_plain_is_second_order():
    ch = perturbed_s4_chart(0.1)
    x = np.array([0.7, 1.3, 1.1, 0.4])
    ref = fd_ricci_oracle(ch, x, h=1e-3)
    e1 = np.max(np.abs(fd_ricci_oracle(ch, x, h=8e-3, richardson=False) - ref))
    e2 = np.max(np.abs(fd_ricci_oracle(ch, x, h=4e-3, richardson=False) - ref))
    assert 3.0 < e1 / e2 < 5.0


def test_oracle_cylinder_chart():
    ch = warped_s3_chart(constant_profile(np.sqrt(2), (0.0, 10.0)))
    x = np.array([2.0, 1.0, 2.0, 0.5])
    assert_allclose(frame_eigenvalues(fd_ricci_oracle(ch, x), ch.metric(x)), [0, 1, 1, 1],
                    atol=1e-7)


def test_oracle_rejects_degenerate_points():
    ch = perturbed_s4_chart(0.1)
    with pytest.raises(DomainError):
        fd_ricci_oracle(ch, np.array([0.005, 1.0, 1.0, 1.0]))
    with pytest.raises(DomainError):
        fd_ricci_oracle(ch, np.array([0.7, 1.0, np.pi - 0.001, 1.0]))
