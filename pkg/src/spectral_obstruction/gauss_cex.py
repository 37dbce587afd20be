"""A CD(1, inf) weighted manifold whose (d+2)-th eigenvalue is below the Gaussian's.

``R^d`` carries the torpedo metric ``dr^2 + rho(r)^2 g_{S^{d-1}}``: a round cap of
radius ``delta = sqrt(d-2)`` smoothly capped onto the cylinder ``R x delta S^{d-1}``
around ``r = B = pi delta / 2``.  The measure ``e^{-V} dvol`` has a radial potential
vanishing on the cap and growing like ``(r - B)^2 / 2`` along the cylinder.
The coordinate functions of the cross-section and one radial function give
``d + 1`` test functions with Rayleigh quotient below 2.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .numerics import QuadratureRule, gauss_legendre_nodes, integrate, wallis
from .numerics.spheres import sphere_area, sphere_monomial_integral
from .report import Check, first_failure, lower, upper
from .warped_geometry import (RadialWeightedManifold, WarpProfile, bakry_emery_frame,
                              ricci_lower_bound)

J0 = float(np.sqrt(np.pi / 2))
ENDPOINT_MARGIN = 1e-4

# composite Gauss-Legendre rule for partial moments of the bump on [-1/2, y]
_PANELS = 8
_PANEL_NODES = 24


def bump(s):
    """``psi(s) = exp(-1/(1 - 4 s^2))`` on ``|s| < 1/2``, zero elsewhere."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 0.5
    out = np.zeros_like(s)
    out[inside] = np.exp(-1.0 / (1.0 - 4.0 * s[inside] ** 2))
    return out


def _lower_moments_raw(y: np.ndarray, n: int) -> np.ndarray:
    x, w = gauss_legendre_nodes(_PANEL_NODES)
    edges = -0.5 + (y[:, None] + 0.5) * np.linspace(0, 1, _PANELS + 1)[None, :]
    a, b = edges[:, :-1, None], edges[:, 1:, None]
    u = 0.5 * (b - a) * x + 0.5 * (a + b)
    vals = (y[:, None, None] - u) ** n * bump(u) * (0.5 * (b - a)) * w
    return vals.sum(axis=(1, 2))


_HALF_MOMENTS = {n: float(_lower_moments_raw(np.zeros(1), n)[0]) for n in range(3)}


def _lower_moments(y, n: int) -> np.ndarray:
    """``P_n(y) = int_{-1/2}^{y} (y - u)^n psi(u) du`` for ``y <= 0`` (vectorized).

    Only arguments strictly inside (-1/2, 0) need quadrature.
    """
    y = np.minimum(np.asarray(y, dtype=float), 0.0)
    out = np.where(y >= 0.0, _HALF_MOMENTS[n], 0.0)
    inside = (y > -0.5) & (y < 0.0)
    if np.any(inside):
        out[inside] = _lower_moments_raw(y[inside], n)
    return out


class SmoothStep:
    """``eta(s) = (1/D) int_s^1 psi``: equal to 1 for ``s <= -1/2`` and 0 for ``s >= 1/2``.

    Tails are always computed over the shorter side, so ``eta(-s) = 1 - eta(s)``
    holds to rounding.
    """

    def __init__(self):
        half = float(_lower_moments(np.array(0.0), 0))
        self.D = 2 * half
        self.second_moment = 2 * float(integrate(lambda u: u * u * bump(u), -0.5, 0.0))

    def psi(self, s):
        return bump(s)

    def eta(self, s):
        s = np.asarray(s, dtype=float)
        return np.where(s <= 0, 1 - self.lower_mass(s), self.lower_mass(-s))

    def eta_prime(self, s):
        return -bump(s) / self.D

    def lower_mass(self, s):
        """``(1/D) int_{-1/2}^{s} psi`` for ``s <= 0``; the complement of ``eta`` there."""
        s = np.asarray(s, dtype=float)
        return _lower_moments(np.minimum(s, 0.0), 0) / self.D

    def partial_moment(self, x, n: int):
        """``M_n(x) = int_{-1/2}^{x} (x - u)^n psi(u) du`` for any real ``x`` and n in {0, 1, 2}."""
        x = np.asarray(x, dtype=float)
        neg = _lower_moments(np.minimum(x, 0.0), n)
        pos = _lower_moments(np.minimum(-x, 0.0), n)  # tail moment reflected
        if n == 0:
            right = self.D - pos
        elif n == 1:
            right = x * self.D + pos
        elif n == 2:
            right = x * x * self.D + self.second_moment - pos
        else:
            raise ValueError("moments of order 0..2 only")
        return np.where(x <= 0, neg, right)

    def primitive(self, x):
        """``Theta(x) = int_{-1}^{x} eta``: ``x + 1`` below -1/2, 1 above 1/2."""
        x = np.asarray(x, dtype=float)
        left = x + 1 - _lower_moments(np.clip(x, -0.5, 0.0), 1) / self.D
        right = 1 - _lower_moments(np.clip(-x, -0.5, 0.0), 1) / self.D
        out = np.where(x <= 0, left, right)
        out = np.where(x <= -0.5, x + 1, out)
        return np.where(x >= 0.5, 1.0, out)


@dataclass(frozen=True)
class TorpedoParams:
    d: int = 4
    eps: float = 0.05
    rmax_offset: float = 10.0

    def __post_init__(self):
        if self.d < 4:
            raise ValueError(f"d={self.d}: the construction needs d >= 4")
        if not 0 < self.eps <= self.B / 4:
            raise ValueError(f"eps={self.eps} outside (0, B/4] with B={self.B:.6g}")
        if self.rmax_offset < 8:
            raise ValueError("Rmax must be at least B + 8")

    @property
    def delta(self) -> float:
        return float(np.sqrt(self.d - 2))

    @property
    def B(self) -> float:
        return np.pi * self.delta / 2

    @property
    def Rmax(self) -> float:
        return self.B + self.rmax_offset

    def breakpoints(self) -> list[float]:
        """Points where some profile switches piece, in increasing order, from 0 to Rmax."""
        B, e = self.B, self.eps
        return [0.0, B - 2 * e, B - e, B - e / 2, B, B + e / 2, B + e, self.Rmax]


_STEP: SmoothStep | None = None


def smooth_step() -> SmoothStep:
    global _STEP
    if _STEP is None:
        _STEP = SmoothStep()
    return _STEP


# -- the torpedo profile -----------------------------------------------------

class ThetaValues(NamedTuple):
    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    unit_gap: np.ndarray  # 1 - (delta theta')^2 = (1 - eta)(1 + eta)


def theta_eps(r, p: TorpedoParams) -> ThetaValues:
    """Angle function equal to ``r/delta`` up to ``B - eps`` and ``pi/2`` from ``B + eps`` on."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be nonnegative")
    st = smooth_step()
    dl, B, e = p.delta, p.B, p.eps
    s = (r - B) / e
    eta = st.eta(s)
    one_minus = np.where(s <= 0, st.lower_mass(s), 1 - st.lower_mass(-s))
    value = (B - e) / dl + (e / dl) * st.primitive(s)
    value = np.where(r <= B - e, r / dl, value)
    value = np.where(r >= B + e, np.pi / 2, value)
    d1 = eta / dl
    d2 = st.eta_prime(s) / (dl * e)
    return ThetaValues(value, d1, d2, one_minus * (1 + eta))


def torpedo_profile(p: TorpedoParams) -> WarpProfile:
    """``rho(r) = delta sin theta_eps(r)`` on ``[0, Rmax]``."""
    dl = p.delta

    def value(r):
        return dl * np.sin(theta_eps(r, p).value)

    def d1(r):
        th = theta_eps(r, p)
        return dl * np.cos(th.value) * th.d1

    def d2(r):
        th = theta_eps(r, p)
        return dl * (np.cos(th.value) * th.d2 - np.sin(th.value) * th.d1**2)

    def gap(r):
        th = theta_eps(r, p)
        return np.sin(th.value) ** 2 + np.cos(th.value) ** 2 * th.unit_gap

    return WarpProfile((0.0, p.Rmax), value, d1, d2, breakpoints=(p.B - p.eps / 2, p.B + p.eps / 2),
                       one_minus_d1_sq=gap, name=f"torpedo(d={p.d}, eps={p.eps:g})")


# -- the potential -----------------------------------------------------------

def cutoff_q(r, p: TorpedoParams):
    """Smooth nondecreasing cutoff: 0 on ``[0, B - 2eps]``, 1 on ``[B - eps, inf)``."""
    st = smooth_step()
    s = (np.asarray(r, dtype=float) - (p.B - 1.5 * p.eps)) / p.eps
    return np.where(s <= 0, st.lower_mass(s), 1 - st.lower_mass(-s))


@dataclass(frozen=True)
class PotentialCache:
    """``V(r) = int_0^r (r - u) q(u) du`` with its values at the anchors ``B - eps`` and ``B``."""

    params: TorpedoParams
    nodes: int = 64
    anchors: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        p = self.params
        r1 = p.B - p.eps
        v1, dv1 = self._transition(np.array([r1]))
        self.anchors["B-eps"] = (float(v1[0]), float(dv1[0]))
        h = p.eps
        self.anchors["B"] = (float(v1[0] + dv1[0] * h + 0.5 * h * h), float(dv1[0] + h))

    def _transition(self, r):
        p = self.params
        x, w = gauss_legendre_nodes(self.nodes)
        a = p.B - 2 * p.eps
        half = 0.5 * (r - a)[..., None]
        u = half * x + a + half
        q = cutoff_q(u, p)
        v = np.sum(half * w * (r[..., None] - u) * q, axis=-1)
        dv = np.sum(half * w * q, axis=-1)
        return v, dv

    def __call__(self, r):
        """``(V, V', V'')`` at ``r``."""
        p = self.params
        r = np.asarray(r, dtype=float)
        a, r1 = p.B - 2 * p.eps, p.B - p.eps
        v1, dv1 = self.anchors["B-eps"]
        h = r - r1
        v = v1 + dv1 * h + 0.5 * h * h
        dv = dv1 + h
        mid = (r > a) & (r < r1)
        if np.any(mid):
            vm, dvm = self._transition(r[mid])
            v = np.array(v, dtype=float)
            dv = np.array(dv, dtype=float)
            v[mid], dv[mid] = vm, dvm
        low = r <= a
        v = np.where(low, 0.0, v)
        dv = np.where(low, 0.0, dv)
        return v, dv, cutoff_q(r, p)

    def profile(self) -> WarpProfile:
        return WarpProfile((0.0, self.params.Rmax), lambda r: self(r)[0], lambda r: self(r)[1],
                           lambda r: self(r)[2], breakpoints=(self.params.B - 2 * self.params.eps,
                                                              self.params.B - self.params.eps),
                           name="V_eps")


def potential_V(r, cache: PotentialCache | None):
    if cache is None:
        raise ValueError("potential cache not built")
    return cache(r)


def potential_closed_form(r, p: TorpedoParams):
    """``(V, V')`` through the second and first partial moments of the bump.

    Independent of :class:`PotentialCache`: ``V = eps^2 M_2(s) / (2D)`` and
    ``V' = eps M_1(s) / D`` with ``s = (r - B + 3 eps/2) / eps``.
    """
    st = smooth_step()
    s = (np.asarray(r, dtype=float) - (p.B - 1.5 * p.eps)) / p.eps
    return (p.eps**2 * st.partial_moment(s, 2) / (2 * st.D),
            p.eps * st.partial_moment(s, 1) / st.D)


# -- weighted manifolds ------------------------------------------------------

def torpedo_manifold(p: TorpedoParams, cache: PotentialCache | None = None) -> RadialWeightedManifold:
    cache = cache or PotentialCache(p)
    return RadialWeightedManifold(p.d, torpedo_profile(p), cache.profile())


def euclidean_gaussian(d: int, rmax: float = 12.0) -> RadialWeightedManifold:
    """Flat ``R^d`` with the standard Gaussian potential ``r^2/2``."""
    prof = WarpProfile((0.0, rmax), lambda r: np.array(r, dtype=float), np.ones_like, np.zeros_like,
                       one_minus_d1_sq=np.zeros_like, name="r")
    pot = WarpProfile((0.0, rmax), lambda r: 0.5 * np.asarray(r, dtype=float) ** 2,
                      lambda r: np.array(r, dtype=float), np.ones_like, name="r^2/2")
    return RadialWeightedManifold(d, prof, pot)


def default_grid(p: TorpedoParams, n: int = 10_000) -> np.ndarray:
    return np.linspace(ENDPOINT_MARGIN, p.Rmax, n)


class CDResult(NamedTuple):
    minimum: float
    argmin: float
    radial_min: float
    tangential_min: float
    cap_radial_min: float  # over r <= B - eps
    chain_min: float  # min of (d-2)(1 - rho'^2) - rho^2
    unit_sum_max: float  # max of rho'^2 + rho^2/delta^2


def cd_check(p: TorpedoParams, grid=None, manifold: RadialWeightedManifold | None = None) -> CDResult:
    """Minimum of the Bakry-Emery frame eigenvalues over ``grid``."""
    grid = default_grid(p) if grid is None else np.asarray(grid, dtype=float)
    man = manifold or torpedo_manifold(p)
    lb = ricci_lower_bound(man, grid)
    fr = bakry_emery_frame(man, grid)
    rho, rho1, _ = man.profile(grid)
    gap = man.profile.unit_gap(grid)
    cap = grid <= p.B - p.eps
    return CDResult(lb.rho_star, lb.argmin, lb.per_direction_min[0], lb.per_direction_min[1],
                    float(np.min(fr.radial[cap])) if cap.any() else np.inf,
                    float(np.min((p.d - 2) * gap - rho**2)),
                    float(np.max(1 - gap + rho**2 / p.delta**2)))


def density_error_check(p: TorpedoParams, grid=None, cache: PotentialCache | None = None) -> float:
    """Max over ``grid`` of ``|e^{-V_eps} - e^{-V_0}| / (2 eps (1 + r - B) e^{-(r-B)^2/2})``."""
    grid = np.linspace(p.B, p.Rmax, 1000) if grid is None else np.asarray(grid, dtype=float)
    if np.any(grid < p.B):
        raise ValueError("grid must lie in [B, Rmax]")
    cache = cache or PotentialCache(p)
    x = grid - p.B
    v_eps = cache(grid)[0]
    # e^{-V0} (1 - e^{-(V_eps - V0)}) avoids cancellation
    diff = np.exp(-0.5 * x * x) * -np.expm1(-(v_eps - 0.5 * x * x))
    bound = 2 * p.eps * (1 + x) * np.exp(-0.5 * x * x)
    return float(np.max(np.abs(diff) / bound))


# -- model measure and constants ---------------------------------------------

MODEL_TAIL = 40.0


def _piecewise_integral(f, points, rule=None) -> float:
    return float(sum(integrate(f, a, b, rule) for a, b in zip(points[:-1], points[1:]) if b > a))


class ModelConstants(NamedTuple):
    A: float
    delta_U: float
    delta_b: float
    m_d: float


def model_constants(d: int) -> ModelConstants:
    """Closed forms through Wallis integrals and ``J0 = sqrt(pi/2)``."""
    dl = np.sqrt(d - 2)
    om = sphere_area(d - 1)
    Im1, Ip1 = wallis(d - 1), wallis(d + 1)
    delta_U = om / d * (dl ** (d - 2) * d * (d - 4) / (d + 1) * Im1 + dl ** (d - 3) * (d - 3) * J0)
    delta_b = om * (dl ** (d - 2) * (d - 4) / (d + 1) * Im1 + dl ** (d + 1) / d**2 * J0)
    return ModelConstants(dl / d, delta_U, delta_b, om * dl**d * (Im1 - Ip1))


def _model_pieces(d: int):
    dl = np.sqrt(d - 2)
    B = np.pi * dl / 2

    def w0(r):
        r = np.asarray(r, dtype=float)
        cap = r <= B
        rho = np.where(cap, dl * np.sin(np.minimum(r, B) / dl), dl)
        v = np.where(cap, 0.0, 0.5 * (r - B) ** 2)
        return np.exp(-v) * rho ** (d - 1)

    return dl, B, w0, [0.0, B, B + MODEL_TAIL]


def model_constants_quadrature(d: int, rule: QuadratureRule | None = None) -> ModelConstants:
    """The same constants from their defining integrals against the model measure."""
    dl, B, w0, pts = _model_pieces(d)
    om = sphere_area(d - 1)
    cap = lambda f: integrate(f, 0.0, B, rule)
    A = cap(lambda r: np.cos(r / dl) * (dl * np.sin(r / dl)) ** (d - 1)) / dl ** (d - 1)

    def a0(r):
        return np.where(r <= B, np.sin(np.minimum(r, B) / dl), 1.0)

    def a0p(r):
        return np.where(r <= B, np.cos(np.minimum(r, B) / dl) / dl, 0.0)

    def bA(r):
        return np.where(r <= B, np.cos(np.minimum(r, B) / dl), -A * (r - B))

    def bAp(r):
        return np.where(r <= B, -np.sin(np.minimum(r, B) / dl) / dl, -A)

    I = lambda f: _piecewise_integral(f, pts, rule)
    D_U = om / d * I(lambda r: a0(r) ** 2 * w0(r))
    N_U = om / d * (I(lambda r: a0p(r) ** 2 * w0(r)) + (d - 1) / dl**2 * I(w0))
    b2 = om * I(lambda r: bA(r) ** 2 * w0(r))
    bp2 = om * I(lambda r: bAp(r) ** 2 * w0(r))
    m_d = om * dl**d * integrate(lambda t: np.cos(t) ** 2 * np.sin(t) ** (d - 1), 0, np.pi / 2, rule)
    return ModelConstants(A, 2 * D_U - N_U, 2 * b2 - bp2, m_d)


def model_mean_bA(d: int, rule: QuadratureRule | None = None) -> float:
    """``int b_A d nu_0`` with the closed-form slope ``A = delta/d``; zero by the choice of A."""
    dl, B, w0, pts = _model_pieces(d)
    A = dl / d
    bA = lambda r: np.where(r <= B, np.cos(np.minimum(r, B) / dl), -A * (r - B))
    return sphere_area(d - 1) * _piecewise_integral(lambda r: bA(r) * w0(r), pts, rule)


def model_rayleigh_U(d: int, rule: QuadratureRule | None = None) -> float:
    """``N_U^0 / D_U^0`` for the model measure."""
    dl, B, w0, pts = _model_pieces(d)
    I = lambda f: _piecewise_integral(f, pts, rule)
    a0 = lambda r: np.where(r <= B, np.sin(np.minimum(r, B) / dl), 1.0)
    a0p = lambda r: np.where(r <= B, np.cos(np.minimum(r, B) / dl) / dl, 0.0)
    return (I(lambda r: a0p(r) ** 2 * w0(r)) + (d - 1) / dl**2 * I(w0)) / I(lambda r: a0(r) ** 2 * w0(r))


# -- test functions on the perturbed measure ---------------------------------

def radial_bA(r, p: TorpedoParams):
    """``b_A`` and its (weak) derivative with ``A = delta/d``."""
    r = np.asarray(r, dtype=float)
    dl, B, A = p.delta, p.B, p.delta / p.d
    cap = r <= B
    rc = np.minimum(r, B)
    return (np.where(cap, np.cos(rc / dl), -A * (r - B)),
            np.where(cap, -np.sin(rc / dl) / dl, -A))


class MeasureData(NamedTuple):
    c_eps: float
    Z_eps: float
    model_mean: float
    Z_lower: float


def _weight(p: TorpedoParams, man: RadialWeightedManifold):
    return man.density


def c_eps_and_Z(p: TorpedoParams, rule: QuadratureRule | None = None,
                manifold: RadialWeightedManifold | None = None) -> MeasureData:
    man = manifold or torpedo_manifold(p)
    om = sphere_area(p.d - 1)
    pts = p.breakpoints()
    Z = om * _piecewise_integral(man.density, pts, rule)
    mean = om * _piecewise_integral(lambda r: radial_bA(r, p)[0] * man.density(r), pts, rule)
    dl = p.delta
    Z_low = om * integrate(lambda r: (dl * np.sin(r / dl)) ** (p.d - 1), 0.0, p.B / 2, rule)
    return MeasureData(mean / Z, Z, model_mean_bA(p.d, rule), Z_low)


class RayleighResult(NamedTuple):
    R_U: float
    R_B: float
    orthogonality_max: float
    gram_l2: np.ndarray
    gram_dirichlet: np.ndarray


def _basis(p: TorpedoParams, man: RadialWeightedManifold, c_eps: float):
    """Radial parts, their derivatives and angular monomials of ``1, B_eps, U_1..U_d``."""
    dl, d = p.delta, p.d
    one = (lambda r: np.ones_like(r), lambda r: np.zeros_like(r), (0,) * d)
    bfun = (lambda r: radial_bA(r, p)[0] - c_eps, lambda r: radial_bA(r, p)[1], (0,) * d)
    a = lambda r: man.profile.value(r) / dl
    da = lambda r: man.profile.first_derivative(r) / dl
    coords = [(a, da, tuple(int(i == j) for j in range(d))) for i in range(d)]
    return [one, bfun, *coords]


def _angular(pi, pj, grad: bool) -> float:
    """``int_{S^{d-1}}`` of a product of angular factors, or of their gradients' inner product.

    For coordinate functions ``<grad x_i, grad x_j> = delta_ij - x_i x_j`` on the sphere.
    """
    prod = tuple(a + b for a, b in zip(pi, pj))
    if not grad:
        return sphere_monomial_integral(prod)
    if sum(pi) == 0 or sum(pj) == 0:
        return 0.0
    delta = sphere_monomial_integral((0,) * len(pi)) if pi == pj else 0.0
    return delta - sphere_monomial_integral(prod)


def rayleigh_tests(p: TorpedoParams, rule: QuadratureRule | None = None,
                   manifold: RadialWeightedManifold | None = None,
                   measure: MeasureData | None = None) -> RayleighResult:
    man = manifold or torpedo_manifold(p)
    meas = measure or c_eps_and_Z(p, rule, man)
    pts = p.breakpoints()
    w = man.density
    I = lambda f: _piecewise_integral(f, pts, rule)
    basis = _basis(p, man, meas.c_eps)
    n = len(basis)
    gl2 = np.zeros((n, n))
    gdir = np.zeros((n, n))
    radial_cache: dict = {}

    def radial(key, f):
        if key not in radial_cache:
            radial_cache[key] = I(f)
        return radial_cache[key]

    kind = lambda i: min(i, 2)  # 0 constant, 1 B_eps, 2 any U_i (same radial part)
    inv_rho2 = lambda r: 1.0 / man.profile.value(r) ** 2
    for i in range(n):
        fi, dfi, ang_i = basis[i]
        for j in range(i, n):
            fj, dfj, ang_j = basis[j]
            key = (kind(i), kind(j))
            ang = _angular(ang_i, ang_j, False)
            if ang:
                gl2[i, j] = ang * radial(("m",) + key, lambda r: fi(r) * fj(r) * w(r))
            val = 0.0
            if ang:
                val += ang * radial(("d",) + key, lambda r: dfi(r) * dfj(r) * w(r))
            gang = _angular(ang_i, ang_j, True)
            if gang:
                val += gang * radial(("t",) + key, lambda r: fi(r) * fj(r) * inv_rho2(r) * w(r))
            gdir[i, j] = val
            gl2[j, i], gdir[j, i] = gl2[i, j], gdir[i, j]
    R_B = gdir[1, 1] / gl2[1, 1]
    R_U = gdir[2, 2] / gl2[2, 2]
    norm = np.sqrt(np.outer(np.diag(gl2), np.diag(gl2)))
    off_l2 = np.max(np.abs(gl2 - np.diag(np.diag(gl2))) / norm)
    sub = gdir[1:, 1:]
    dn = np.sqrt(np.outer(np.diag(sub), np.diag(sub)))
    off_dir = np.max(np.abs(sub - np.diag(np.diag(sub))) / dn)
    return RayleighResult(float(R_U), float(R_B), float(max(off_l2, off_dir)), gl2, gdir)


# -- the pipeline ------------------------------------------------------------

@dataclass
class GaussReport:
    params: TorpedoParams
    mode: str
    cd_min: float
    cap_radial_min: float
    rayleigh_U: float
    rayleigh_B: float
    c_eps: float
    Z_eps: float
    delta_U: float
    delta_b: float
    lambda_d_plus_2_bound: float
    orthogonality_max: float
    density_error_ratio: float
    truncation_tail: float
    checks: list[Check]
    spectrum_lambda_d_plus_2: float | None = None
    spectrum_error: float | None = None
    spectrum_certificate: float | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failing_stage(self) -> str | None:
        return first_failure(self.checks)


CD_TOL = 1e-9
ORTHO_TOL = 1e-10
RAYLEIGH_TOL = 1e-8


def verify_gaussian(p: TorpedoParams, mode: str = "certificate", grid_n: int = 10_000,
                    spectrum_n: int = 2000, rule: QuadratureRule | None = None) -> GaussReport:
    """Check CD(1, inf), the test-function bounds and (optionally) the computed lambda_{d+2}."""
    if mode not in ("certificate", "full-spectrum"):
        raise ValueError(f"unknown mode {mode!r}")
    cache = PotentialCache(p)
    man = torpedo_manifold(p, cache)
    cd = cd_check(p, default_grid(p, grid_n), man)
    meas = c_eps_and_Z(p, rule, man)
    ray = rayleigh_tests(p, rule, man, meas)
    mc = model_constants(p.d)
    dens = density_error_check(p, cache=cache)
    bound = max(ray.R_U, ray.R_B)
    checks = [
        lower("cd_min >= 1", cd.minimum, 1.0, CD_TOL),
        lower("cap_radial >= (d-1)/(d-2)", cd.cap_radial_min, (p.d - 1) / (p.d - 2), CD_TOL),
        upper("R_U < 2", ray.R_U, 2.0, RAYLEIGH_TOL),
        upper("R_B < 2", ray.R_B, 2.0, RAYLEIGH_TOL),
        upper("orthogonality", ray.orthogonality_max, ORTHO_TOL, 0.0, strict=False),
        upper("density_error_ratio <= 1", dens, 1.0, 0.0, strict=False),
    ]
    report = GaussReport(p, mode, cd.minimum, cd.cap_radial_min, ray.R_U, ray.R_B, meas.c_eps,
                         meas.Z_eps, mc.delta_U, mc.delta_b, bound, ray.orthogonality_max, dens,
                         float(np.exp(-0.5 * p.rmax_offset**2)), checks)
    if mode == "full-spectrum":
        from .spectral import compute_spectrum, cylinder_geometry
        spec = compute_spectrum(cylinder_geometry(man, p.Rmax, label="torpedo"), p.d + 2,
                                n=spectrum_n)
        lam = spec.lambda_k(p.d + 2)
        report.spectrum_lambda_d_plus_2 = lam
        report.spectrum_error = spec.error_bound(p.d + 2)
        report.spectrum_certificate = spec.truncation_lambda
        checks.append(upper("lambda_{d+2} < 2", lam, 2.0, max(RAYLEIGH_TOL, 10 * report.spectrum_error)))
    return report


def euclidean_reference(d: int, n: int = 2000, rmax: float = 12.0):
    """``lambda_{d+2}`` of the standard Gaussian computed by the same solver (expected 2)."""
    from .spectral import compute_spectrum, cylinder_geometry
    spec = compute_spectrum(cylinder_geometry(euclidean_gaussian(d, rmax), rmax, label="gaussian"),
                            d + 2, n=n)
    return spec.lambda_k(d + 2), spec


def choose_eps(d: int, start: float = 0.05, floor: float = 1e-8) -> float:
    """Largest ``start / 2^j`` whose certificate verifies."""
    eps = start
    while eps >= floor:
        try:
            if verify_gaussian(TorpedoParams(d, eps)).passed:
                return eps
        except ValueError:
            pass
        eps /= 2
    raise RuntimeError(f"no eps >= {floor} verified for d={d}")
