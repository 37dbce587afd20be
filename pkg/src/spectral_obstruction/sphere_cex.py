"""A metric on S^d with Ric >= rho g whose K-th eigenvalue is below the round one.

Write ``S^d`` in ``C x R^{d-1}`` as ``(z, y) = (sin t e^{i theta}, cos t omega)`` with
``t in [0, pi/2]`` and ``omega in S^{d-2}``.  The perturbed metric

    g_eps = dt^2 + a_eps(t)^2 dtheta^2 + cos^2 t g_{S^{d-2}},
    a_eps = sin t sqrt(1 + eps sin^4 t),

stretches the circle direction.  Its Ricci curvature is at least
``rho_eps = d - 1 - 25 eps / 12`` while the test function ``Re(z^k)`` has Rayleigh
quotient below the ``K``-th eigenvalue of the round sphere rescaled to Ricci
``rho_eps``, with ``K = dim(H_0 + ... + H_{k-1}) + 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import NamedTuple, Sequence

import numpy as np

from .numerics import QuadratureRule, integrate, moment_ratio
from .numerics.spheres import sphere_monomial_integral
from .report import Check, first_failure, lower, upper
from .warped_geometry import (FiberSpec, MultiplyWarpedMetric, WarpProfile, cos_profile,
                              ricci_frame, ricci_lower_bound)

ENDPOINT_MARGIN = 1e-4
F_MAX = Fraction(25, 12)


# -- curvature ---------------------------------------------------------------

def f_curvature(q, eps):
    """``f(q) = [q(10 - 12q) + 2 eps q^3 (3 - 4q)] / (1 + eps q^2)^2``; at most 25/12."""
    q = np.asarray(q, dtype=float)
    return (q * (10 - 12 * q) + 2 * eps * q**3 * (3 - 4 * q)) / (1 + eps * q**2) ** 2


def sos_residual() -> dict[tuple[int, int], Fraction]:
    """Coefficients of ``25/12 (1+eps q^2)^2 - numerator(f) - SOS`` as a polynomial in (q, eps).

    The sum of squares is ``12(q - 5/12)^2 + eps q^2 (8q^2 - 6q + 25/6) + 25/12 eps^2 q^4``;
    the identity holds iff every returned coefficient is zero.  Keys are
    ``(power of q, power of eps)``.
    """
    poly: dict[tuple[int, int], Fraction] = {}

    def add(i, j, c):
        poly[(i, j)] = poly.get((i, j), Fraction(0)) + Fraction(c)

    c = F_MAX
    # 25/12 (1 + 2 eps q^2 + eps^2 q^4)
    add(0, 0, c); add(2, 1, 2 * c); add(4, 2, c)
    # - [10 q - 12 q^2 + 6 eps q^3 - 8 eps q^4]
    add(1, 0, -10); add(2, 0, 12); add(3, 1, -6); add(4, 1, 8)
    # - 12 (q^2 - 5/6 q + 25/144)
    add(2, 0, -12); add(1, 0, 10); add(0, 0, Fraction(-25, 12))
    # - eps (8 q^4 - 6 q^3 + 25/6 q^2)
    add(4, 1, -8); add(3, 1, 6); add(2, 1, Fraction(-25, 6))
    # - 25/12 eps^2 q^4
    add(4, 2, -c)
    return poly


def perturbed_profile(eps: float) -> WarpProfile:
    """``a_eps(t) = sin t sqrt(1 + eps sin^4 t)`` with analytic derivatives."""
    def value(t):
        s = np.sin(t)
        return s * np.sqrt(1 + eps * s**4)

    def d1(t):
        s, c = np.sin(t), np.cos(t)
        u = 1 + eps * s**4
        return c * (1 + 3 * eps * s**4) / np.sqrt(u)

    def d2(t):
        s, c = np.sin(t), np.cos(t)
        u = 1 + eps * s**4
        p = 1 + 3 * eps * s**4
        return (-s * p * u + 12 * eps * s**3 * c**2 * u - 2 * eps * s**3 * c**2 * p) / u**1.5

    def gap(t):
        s = np.sin(t)
        u = 1 + eps * s**4
        return s**2 * (1 - 5 * eps * s**2 + 6 * eps * s**4 - 9 * eps**2 * s**6 * (1 - s**2)) / u

    return WarpProfile((0.0, np.pi / 2), value, d1, d2, one_minus_d1_sq=gap, name=f"a_eps({eps:g})")


def perturbed_metric(d: int, eps: float) -> MultiplyWarpedMetric:
    return MultiplyWarpedMetric((0.0, np.pi / 2), ((FiberSpec.sphere(1), perturbed_profile(eps)),
                                                   (FiberSpec.sphere(d - 2), cos_profile())))


class FrameClosedForm(NamedTuple):
    R_t: np.ndarray
    R_theta: np.ndarray
    R_S: np.ndarray


def frame_closed_form(d: int, eps: float, t) -> FrameClosedForm:
    """Frame Ricci of ``g_eps`` written through ``f`` and ``sin^4 t``."""
    s2 = np.sin(np.asarray(t, dtype=float)) ** 2
    lift = 2 * eps * s2**2 / (1 + eps * s2**2)
    core = 1 - eps * f_curvature(s2, eps)
    return FrameClosedForm(core + (d - 2), (d - 2) * (1 + lift) + core, d - 1 + lift)


def rho_eps(d: int, eps) -> Fraction | float:
    if isinstance(eps, Fraction):
        return d - 1 - F_MAX * eps
    return d - 1 - 25 * eps / 12


def default_grid(n: int = 10_000, margin: float = ENDPOINT_MARGIN) -> np.ndarray:
    return np.linspace(margin, np.pi / 2 - margin, n)


# -- moments and the choice of k, eps ----------------------------------------

class BetaEta(NamedTuple):
    beta: Fraction
    eta: Fraction


def beta_eta(d: int, k: int) -> BetaEta:
    if d < 2 or k < 1:
        raise ValueError("need d >= 2 and k >= 1")
    beta = Fraction(2 * k + d - 1, 2 * (k + d - 1)) * moment_ratio(d, k, k + 2)
    return BetaEta(beta, beta - F_MAX / (d - 1))


def choose_k(d: int) -> int:
    """Smallest ``k`` with ``eta_{d,k} > 0``."""
    if d < 4:
        raise ValueError(f"d={d}: the construction needs d >= 4")
    k = 1
    while beta_eta(d, k).eta <= 0:
        k += 1
    return k


def eps_zero_exact(d: int, k: int) -> Fraction:
    return Fraction(2 * k + d - 2) / (Fraction((k - 1) * (k + d - 2), 2)
                                      + F_MAX / (d - 1) * k * (k + d - 1))


def eps_zero(d: int, k: int) -> float:
    if beta_eta(d, k).eta <= 0:
        raise ValueError(f"eta_(d={d},k={k}) <= 0")
    return float(eps_zero_exact(d, k))


def low_harmonic_check(d: int, k: int, eps: float) -> Check:
    """``(1 + eps/2)(k-1)(k+d-2) < (rho_eps/(d-1)) k(k+d-1)`` in exact rationals.

    The left side bounds the Rayleigh quotient of every harmonic of degree below k
    under ``g_eps``.
    """
    e = Fraction(eps)
    lhs = (1 + e / 2) * (k - 1) * (k + d - 2)
    rhs = rho_eps(d, e) / (d - 1) * k * (k + d - 1)
    return Check("low_harmonic_bound", float(lhs), float(rhs), float(rhs - lhs), 0.0)


# -- Rayleigh quotient of Re(z^k) --------------------------------------------

def _beta_weight(d):
    # q = sin^2 t pushes sin t cos^{d-2} t dt forward to the Beta(1, (d-1)/2) law
    return lambda t: np.sin(t) * np.cos(t) ** (d - 2)


def rayleigh_fk(d: int, k: int, eps: float, rule: QuadratureRule | None = None) -> float:
    """Rayleigh quotient of ``Re(z^k)`` under ``g_eps``, reduced to two q-integrals."""
    w = _beta_weight(d)

    def num(t):
        q = np.sin(t) ** 2
        r = np.sqrt(1 + eps * q**2)
        return w(t) * q ** (k - 1) * ((1 - q) * r + 1 / r)

    def den(t):
        q = np.sin(t) ** 2
        return w(t) * q**k * np.sqrt(1 + eps * q**2)

    a, b = 0.0, np.pi / 2
    return k * k * integrate(num, a, b, rule) / integrate(den, a, b, rule)


def _q_ratios(d: int, k: int) -> list[float]:
    """``Q_{k+j}/Q_k`` for j = 0..4."""
    return [float(moment_ratio(d, k, k + j)) for j in range(5)]


def phi(d: int, k: int, eps: float) -> float:
    """Upper bound for ``rayleigh_fk`` from second-order Taylor bounds on ``sqrt(1+x)``."""
    q = _q_ratios(d, k)
    den = q[0] / 2 + eps * q[2] / 4 - eps**2 * q[4] / 16
    if den <= 0:
        raise ValueError(f"denominator of phi nonpositive at eps={eps}")
    num = 0.5 * k * (k + d - 1) * q[0] - eps * k * k / 4 * q[2] + 3 * eps**2 * k * k / 16 * q[3]
    return num / den


def phi_prime_at_zero(d: int, k: int) -> float:
    return -k * (k + d - 1) * float(beta_eta(d, k).beta)


# -- the comparison eigenvalue and the index K -------------------------------

@lru_cache(maxsize=None)
def harmonic_dim(d: int, l: int) -> int:
    """Dimension of degree-``l`` spherical harmonics on ``S^d``."""
    if l < 0:
        return 0
    if l == 0:
        return 1
    return comb(l + d, d) - comb(l + d - 2, d)


def K_index(d: int, k: int) -> int:
    return sum(harmonic_dim(d, l) for l in range(k)) + 1


def lambda_can(d: int, rho: float, l: int) -> tuple[float, int]:
    """Eigenvalue of degree-``l`` harmonics on ``S^d`` rescaled to Ricci ``rho``, with multiplicity."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    return rho / (d - 1) * l * (l + d - 1), harmonic_dim(d, l)


# -- orthogonality of Re(z^k) to lower-degree polynomials ---------------------

@dataclass(frozen=True)
class Monomial:
    """``z^alpha zbar^beta y^gamma`` on ``S^d``."""

    alpha: int
    beta: int
    gamma: tuple[int, ...]

    @property
    def degree(self) -> int:
        return self.alpha + self.beta + sum(self.gamma)


def witness_set(d: int, k: int, seed: int = 0, low_degree: int = 4, extra: int = 10) -> list[Monomial]:
    """All monomials of degree <= min(k-1, low_degree) plus ``extra`` random ones of degree < k."""
    nv = d - 1
    out = []
    top = min(k - 1, low_degree)

    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for i in range(total + 1):
            for rest in compositions(total - i, parts - 1):
                yield (i, *rest)

    for deg in range(top + 1):
        for comp in compositions(deg, nv + 2):
            out.append(Monomial(comp[0], comp[1], comp[2:]))
    rng = np.random.default_rng(seed)
    for _ in range(extra if k - 1 > top else 0):
        deg = int(rng.integers(top + 1, k))
        cuts = np.sort(rng.integers(0, deg + 1, size=nv + 1))
        parts = np.diff(np.concatenate([[0], cuts, [deg]]))
        out.append(Monomial(int(parts[0]), int(parts[1]), tuple(int(p) for p in parts[2:])))
    return out


class OrthogonalityResult(NamedTuple):
    l2_max: float
    dirichlet_max: float
    witnesses: int

    @property
    def max(self) -> float:
        return max(self.l2_max, self.dirichlet_max)


def orthogonality_check(d: int, k: int, eps: float, witnesses: Sequence[Monomial] | None = None,
                        rule: QuadratureRule | None = None) -> OrthogonalityResult:
    """Largest normalized pairing of ``Re(z^k)`` with each witness, in ``L^2`` and Dirichlet form.

    With ``z = sin t e^{i theta}`` a witness is ``sin^p t cos^g t e^{i n theta} omega^gamma``.
    Each pairing factors into a ``t``-integral, a ``theta``-integral (periodic
    trapezoid rule, exact for the trigonometric polynomials involved) and an
    integral over ``S^{d-2}``.  The ``omega``-gradient term drops because
    ``Re(z^k)`` does not depend on ``omega``.  Pairings are divided by the two
    norms; for the Dirichlet norm of the witness only its ``t`` and ``theta``
    derivatives are counted, which can only enlarge the reported value.
    """
    if witnesses is None:
        witnesses = witness_set(d, k)
    deg_max = max((m.degree for m in witnesses), default=0)
    nth = 4 * (k + deg_max) + 8
    th = 2 * np.pi * np.arange(nth) / nth
    a = perturbed_profile(eps).value
    s, c = np.sin, np.cos
    vol = lambda t: a(t) * c(t) ** (d - 2)
    I = lambda f: integrate(f, 0.0, np.pi / 2, rule)
    area = sphere_monomial_integral((0,) * (d - 1))

    f_sq = np.pi * area * I(lambda t: s(t) ** (2 * k) * vol(t))
    f_grad = np.pi * area * k * k * I(
        lambda t: s(t) ** (2 * k - 2) * (c(t) ** 2 + s(t) ** 2 / a(t) ** 2) * vol(t))
    l2_max = dir_max = 0.0
    for mono in witnesses:
        p, g, n = mono.alpha + mono.beta, sum(mono.gamma), mono.alpha - mono.beta
        om = sphere_monomial_integral(mono.gamma)
        om2 = sphere_monomial_integral(tuple(2 * x for x in mono.gamma))
        ein = np.exp(1j * n * th)
        cos_k = 2 * np.pi * np.mean(ein * np.cos(k * th))
        sin_k = 2 * np.pi * np.mean(1j * n * ein * -k * np.sin(k * th))

        h_sq = 2 * np.pi * om2 * I(lambda t: s(t) ** (2 * p) * c(t) ** (2 * g) * vol(t))
        h_grad = 2 * np.pi * om2 * I(lambda t: (_dt_sc(p, g, t) ** 2 + n * n * s(t) ** (2 * p)
                                                * c(t) ** (2 * g) / a(t) ** 2) * vol(t))
        l2 = abs(om * cos_k * I(lambda t: s(t) ** (p + k) * c(t) ** g * vol(t)))
        grad = abs(om * cos_k * I(lambda t: _dt_sc(p, g, t) * k * s(t) ** (k - 1) * c(t) * vol(t))
                   + om * sin_k * I(lambda t: s(t) ** (p + k) * c(t) ** g / a(t) ** 2 * vol(t)))
        l2_max = max(l2_max, l2 / np.sqrt(f_sq * h_sq))
        if h_grad > 0:
            dir_max = max(dir_max, grad / np.sqrt(f_grad * h_grad))
    return OrthogonalityResult(float(l2_max), float(dir_max), len(witnesses))


def _dt_sc(p, g, t):
    """``d/dt (sin^p t cos^g t)``."""
    s, c = np.sin(t), np.cos(t)
    out = np.zeros_like(s)
    if p:
        out = out + p * s ** (p - 1) * c ** (g + 1)
    if g:
        out = out - g * s ** (p + 1) * c ** (g - 1)
    return out


# -- the pipeline ------------------------------------------------------------

RICCI_TOL = 1e-9
RAYLEIGH_TOL = 1e-8
ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class SphereParams:
    d: int = 4
    k: int | None = None
    eps: float | None = None

    def resolved(self) -> "SphereParams":
        """Fill in ``k = choose_k(d)`` and ``eps = choose_eps(d, k)`` when absent."""
        if self.d < 4:
            raise ValueError(f"d={self.d}: the construction needs d >= 4")
        k = self.k if self.k is not None else choose_k(self.d)
        eps = self.eps if self.eps is not None else choose_eps(self.d, k)
        if eps < 0:
            raise ValueError("eps must be nonnegative")
        return SphereParams(self.d, k, eps)


@dataclass
class SphereReport:
    params: SphereParams
    mode: str
    rho_eps: float
    K: int
    lambda_K_can: float
    rayleigh_fk: float
    phi_bound: float | None
    ricci_min: float
    ricci_argmin: float
    eta: float
    eps0: float | None
    orthogonality_max: float
    checks: list[Check]
    spectrum_lambda_K: float | None = None
    spectrum_error: float | None = None
    spectrum_certificate: float | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failing_stage(self) -> str | None:
        return first_failure(self.checks)

    @property
    def margins(self) -> dict[str, float]:
        return {c.name: c.margin for c in self.checks}


def certificate_checks(d: int, k: int, eps: float, grid_n: int = 10_000,
                       rule: QuadratureRule | None = None, seed: int = 0):
    """Ricci bound, Rayleigh bound for Re(z^k), low-harmonic arithmetic and orthogonality."""
    rho = rho_eps(d, eps)
    bound = rho / (d - 1) * k * (k + d - 1)
    lb = ricci_lower_bound(perturbed_metric(d, eps), default_grid(grid_n))
    ray = rayleigh_fk(d, k, eps, rule)
    orth = orthogonality_check(d, k, eps, witness_set(d, k, seed), rule)
    checks = [
        lower("ricci_min >= rho_eps", lb.rho_star, rho, RICCI_TOL),
        upper("rayleigh_fk < lambda_K_can", ray, bound, RAYLEIGH_TOL * bound),
        low_harmonic_check(d, k, eps),
        upper("orthogonality", orth.max, ORTHO_TOL, 0.0, strict=False),
    ]
    return checks, lb, ray, orth, bound


def choose_eps(d: int, k: int, floor: float = 1e-8, grid_n: int = 10_000) -> float:
    """Largest ``eps0 / 2^j`` (j >= 1) at which the certificate verifies."""
    eps = eps_zero(d, k) / 2
    while eps >= floor:
        checks = certificate_checks(d, k, eps, grid_n)[0]
        if all(c.passed for c in checks):
            return eps
        eps /= 2
    raise RuntimeError(f"no eps in the ladder below eps0={eps_zero(d, k):.6g} verified "
                       f"for d={d}, k={k}; last failing stage: {first_failure(checks)}")


def verify_sphere(params: SphereParams, mode: str = "certificate", grid_n: int = 10_000,
                  spectrum_n: int = 2000, rule: QuadratureRule | None = None, seed: int = 0,
                  workers: int = 1) -> SphereReport:
    if mode not in ("certificate", "full-spectrum"):
        raise ValueError(f"unknown mode {mode!r}")
    p = params.resolved()
    d, k, eps = p.d, p.k, p.eps
    be = beta_eta(d, k)
    checks = [lower("eta_dk > 0", float(be.eta), 0.0, 0.0, strict=True)]
    cert, lb, ray, orth, bound = certificate_checks(d, k, eps, grid_n, rule, seed)
    checks += cert
    try:
        phi_val = phi(d, k, eps)
    except ValueError:
        phi_val = None
    report = SphereReport(p, mode, float(rho_eps(d, eps)), K_index(d, k), bound, ray, phi_val,
                          lb.rho_star, lb.argmin, float(be.eta),
                          eps_zero(d, k) if be.eta > 0 else None, orth.max, checks)
    if eps == 0:
        report.notes.append("eps = 0 is the round sphere: equality case, no counterexample")
    if mode == "full-spectrum":
        from .spectral import SphereGeometry, compute_spectrum
        K = report.K
        spec = compute_spectrum(SphereGeometry(d, eps, label=f"sphere_eps({eps:.17g})"), K,
                                n=spectrum_n, workers=workers)
        lam = spec.lambda_k(K)
        report.spectrum_lambda_K = lam
        report.spectrum_error = spec.error_bound(K)
        report.spectrum_certificate = spec.truncation_lambda
        checks.append(upper("lambda_K < lambda_K_can", lam, bound,
                            max(RAYLEIGH_TOL * bound, 10 * report.spectrum_error)))
    return report
