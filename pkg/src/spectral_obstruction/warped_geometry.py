"""Ricci curvature of warped products over an interval, and a finite-difference check.

A multiply warped product over a one-dimensional base has the metric

    g = dt^2 + sum_i b_i(t)^2 g_i,

where each fiber ``(F_i, g_i)`` is Einstein with ``Ric_i = kappa_i g_i``.  The
Ricci tensor is diagonal in an adapted orthonormal frame with eigenvalues

    R_base    = -sum_i s_i b_i''/b_i
    R_fiber_i = kappa_i/b_i^2 - b_i''/b_i - (s_i - 1)(b_i'/b_i)^2
                - sum_{k != i} s_k b_i' b_k' / (b_i b_k).

A rotationally symmetric weighted manifold ``dr^2 + rho(r)^2 g_{S^{d-1}}`` with
measure ``e^{-V} dvol`` is the single-fiber case plus the Hessian of ``V``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

ScalarFn = Callable[[np.ndarray], np.ndarray]


class DomainError(ValueError):
    """Evaluation requested where the warped-product formulas degenerate."""


@dataclass(frozen=True)
class WarpProfile:
    """A positive warping function with two analytic derivatives.

    ``one_minus_d1_sq`` may supply ``1 - b'(t)^2`` in a cancellation-free form; it
    is used in the fiber curvature term, where ``1 - b'^2`` and ``b^2`` both vanish
    at a smooth closing point.
    """

    domain: tuple[float, float]
    value: ScalarFn
    first_derivative: ScalarFn
    second_derivative: ScalarFn
    breakpoints: tuple[float, ...] = ()
    one_minus_d1_sq: ScalarFn | None = None
    name: str = ""

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.value(t), self.first_derivative(t), self.second_derivative(t)

    def unit_gap(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.one_minus_d1_sq is not None:
            return self.one_minus_d1_sq(t)
        return 1.0 - self.first_derivative(t) ** 2

    def continuity_defects(self, h: float = 1e-9) -> list[tuple[float, float, float]]:
        """Jumps of (value, first derivative) across each interior breakpoint."""
        out = []
        for p in self.breakpoints:
            lv, ld, _ = self(np.array([p - h]))
            rv, rd, _ = self(np.array([p + h]))
            out.append((p, float(abs(rv - lv)[0]), float(abs(rd - ld)[0])))
        return out


def constant_profile(c: float, domain: tuple[float, float]) -> WarpProfile:
    return WarpProfile(domain, lambda t: np.full_like(t, c, dtype=float),
                       np.zeros_like, np.zeros_like,
                       one_minus_d1_sq=np.ones_like, name=f"const({c:g})")


def sin_profile(domain=(0.0, np.pi / 2)) -> WarpProfile:
    return WarpProfile(domain, np.sin, np.cos, lambda t: -np.sin(t),
                       one_minus_d1_sq=lambda t: np.sin(t) ** 2, name="sin")


def cos_profile(domain=(0.0, np.pi / 2)) -> WarpProfile:
    return WarpProfile(domain, np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t),
                       one_minus_d1_sq=lambda t: np.cos(t) ** 2, name="cos")


def identity_profile(domain=(0.0, np.inf)) -> WarpProfile:
    return WarpProfile(domain, lambda r: np.array(r, dtype=float), np.ones_like, np.zeros_like,
                       one_minus_d1_sq=np.zeros_like, name="r")


@dataclass(frozen=True)
class FiberSpec:
    dim: int
    einstein_constant: float

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("fiber dimension must be >= 1")

    @classmethod
    def sphere(cls, m: int) -> "FiberSpec":
        """Unit round ``S^m``: Einstein constant ``m - 1``."""
        return cls(m, float(m - 1))


@dataclass(frozen=True)
class MultiplyWarpedMetric:
    base_interval: tuple[float, float]
    fibers: tuple[tuple[FiberSpec, WarpProfile], ...]

    def __post_init__(self):
        object.__setattr__(self, "fibers", tuple(self.fibers))
        if not self.fibers:
            raise ValueError("need at least one fiber")
        for _, prof in self.fibers:
            if tuple(prof.domain) != tuple(self.base_interval):
                raise ValueError(f"profile {prof.name!r} domain {prof.domain} "
                                 f"!= base interval {self.base_interval}")

    @property
    def dim(self) -> int:
        return 1 + sum(f.dim for f, _ in self.fibers)


class FrameRicci(NamedTuple):
    base: np.ndarray
    fibers: tuple[np.ndarray, ...]

    def minimum(self) -> np.ndarray:
        return np.minimum.reduce([self.base, *self.fibers])


def _check_interior(t: np.ndarray, interval) -> None:
    lo, hi = interval
    if np.any(t <= lo) or np.any(t >= hi):
        raise DomainError(f"points must lie in the open interval ({lo}, {hi})")


def ricci_frame(metric: MultiplyWarpedMetric, t) -> FrameRicci:
    """Frame Ricci eigenvalues at ``t`` (scalar or array): base first, then one per fiber."""
    t = np.asarray(t, dtype=float)
    _check_interior(t, metric.base_interval)
    vals = [prof(t) for _, prof in metric.fibers]
    for b, _, _ in vals:
        if np.any(b <= 0):
            raise DomainError("a warping function vanishes at the requested point")
    dims = [f.dim for f, _ in metric.fibers]
    logd = [b1 / b for b, b1, _ in vals]
    curv = [b2 / b for b, _, b2 in vals]
    base = -sum(s * c for s, c in zip(dims, curv))
    fibers = []
    for i, ((spec, prof), (b, b1, b2)) in enumerate(zip(metric.fibers, vals)):
        s = spec.dim
        # kappa/b^2 - (s-1)(b'/b)^2 rewritten through 1 - b'^2 to avoid cancellation
        own = (spec.einstein_constant - (s - 1) + (s - 1) * prof.unit_gap(t)) / b**2
        # summing over k != i directly; subtracting the own term from a total cancels badly
        others = sum(dims[k] * logd[k] for k in range(len(dims)) if k != i)
        cross = logd[i] * others
        fibers.append(own - curv[i] - cross)
    return FrameRicci(base, tuple(fibers))


@dataclass(frozen=True)
class RadialWeightedManifold:
    """``(R^d or a ball, dr^2 + rho^2 g_{S^{d-1}}, e^{-V} dvol)``."""

    dim: int
    profile: WarpProfile
    potential: WarpProfile
    normalization: float | None = None

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dimension must be >= 2")

    def as_warped_metric(self) -> MultiplyWarpedMetric:
        return MultiplyWarpedMetric(self.profile.domain,
                                    ((FiberSpec.sphere(self.dim - 1), self.profile),))

    def density(self, r) -> np.ndarray:
        """Unnormalized radial density ``e^{-V} rho^{d-1}``."""
        r = np.asarray(r, dtype=float)
        return np.exp(-self.potential.value(r)) * self.profile.value(r) ** (self.dim - 1)


class BakryEmery(NamedTuple):
    radial: np.ndarray
    tangential: np.ndarray

    def minimum(self) -> np.ndarray:
        return np.minimum(self.radial, self.tangential)


def bakry_emery_frame(man: RadialWeightedManifold, r) -> BakryEmery:
    """The two frame eigenvalues of ``Ric + Hess V``."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("r must be positive")
    rho, rho1, rho2 = man.profile(r)
    if np.any(rho <= 0):
        raise DomainError("profile vanishes at the requested point")
    _, v1, v2 = man.potential(r)
    d = man.dim
    radial = -(d - 1) * rho2 / rho + v2
    tangential = -rho2 / rho + (d - 2) * man.profile.unit_gap(r) / rho**2 + v1 * rho1 / rho
    return BakryEmery(radial, tangential)


class LowerBound(NamedTuple):
    rho_star: float
    argmin: float
    per_direction_min: tuple[float, ...]


def ricci_lower_bound(obj, grid) -> LowerBound:
    """Minimum frame eigenvalue over ``grid``.

    ``obj`` is a :class:`MultiplyWarpedMetric` (Ricci) or a
    :class:`RadialWeightedManifold` (Bakry-Emery tensor).
    """
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise ValueError("empty grid")
    if isinstance(obj, RadialWeightedManifold):
        fr = bakry_emery_frame(obj, grid)
        dirs = (fr.radial, fr.tangential)
    else:
        fr = ricci_frame(obj, grid)
        dirs = (fr.base, *fr.fibers)
    low = np.minimum.reduce(dirs)
    i = int(np.argmin(low))
    return LowerBound(float(low[i]), float(grid[i]), tuple(float(np.min(x)) for x in dirs))


# ---------------------------------------------------------------------------
# Finite-difference oracle

@dataclass(frozen=True)
class Chart:
    """Coordinate metric sampler with the coordinate loci where it degenerates.

    ``singular`` lists ``(axis, value)`` pairs; points must keep a distance of at
    least ``10 h`` from each.
    """

    metric: Callable[[np.ndarray], np.ndarray]
    dim: int
    singular: tuple[tuple[int, float], ...] = field(default=())


def _christoffel(metric, x, h):
    n = x.size
    dg = np.empty((n, n, n))  # dg[k, i, j] = d_k g_ij
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        dg[k] = (metric(x + e) - metric(x - e)) / (2 * h)
    ginv = np.linalg.inv(metric(x))
    # Gamma^l_ij = 1/2 g^{lm} (d_i g_mj + d_j g_mi - d_m g_ij)
    low = 0.5 * (np.einsum("imj->mij", dg) + np.einsum("jmi->mij", dg) - dg)
    return np.einsum("lm,mij->lij", ginv, low)


def _ricci_once(metric, x, h):
    n = x.size
    gam = _christoffel(metric, x, h)
    dgam = np.empty((n, n, n, n))  # dgam[k, l, i, j] = d_k Gamma^l_ij
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        dgam[k] = (_christoffel(metric, x + e, h) - _christoffel(metric, x - e, h)) / (2 * h)
    ric = (np.einsum("kkij->ij", dgam) - np.einsum("jkik->ij", dgam)
           + np.einsum("kkl,lij->ij", gam, gam) - np.einsum("kjl,lik->ij", gam, gam))
    return 0.5 * (ric + ric.T)


def fd_ricci_oracle(chart: Chart, point, h: float = 1e-3, richardson: bool = True) -> np.ndarray:
    """Coordinate Ricci matrix from central differences of the metric components.

    The plain estimate has O(h^2) error; with ``richardson`` the steps ``h`` and
    ``h/2`` are combined to cancel the leading term.  Truncation terms grow like
    inverse powers of the distance to a chart degeneracy, so the step actually
    used is ``min(h, distance/100)``.
    """
    x = np.asarray(point, dtype=float)
    dist = np.inf
    for axis, v in chart.singular:
        dist = min(dist, abs(x[axis] - v))
        if abs(x[axis] - v) < 10 * h:
            raise DomainError(f"coordinate {axis} within 10h of chart degeneracy at {v}")
    h = min(h, dist / 100)
    r1 = _ricci_once(chart.metric, x, h)
    if not richardson:
        return r1
    r2 = _ricci_once(chart.metric, x, h / 2)
    return (4 * r2 - r1) / 3


def frame_eigenvalues(ric: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Eigenvalues of ``g^{-1} Ric`` (sorted), i.e. Ricci in an orthonormal frame."""
    c = np.linalg.cholesky(g)
    ci = np.linalg.inv(c)
    return np.linalg.eigvalsh(ci @ ric @ ci.T)


def _s4_embedding(x):
    t, th, ph, ps = x
    st, ct = np.sin(t), np.cos(t)
    sp, cp = np.sin(ph), np.cos(ph)
    pos = np.array([st * np.cos(th), st * np.sin(th), ct * sp * np.cos(ps),
                    ct * sp * np.sin(ps), ct * cp])
    jac = np.array([
        [ct * np.cos(th), -st * np.sin(th), 0.0, 0.0],
        [ct * np.sin(th), st * np.cos(th), 0.0, 0.0],
        [-st * sp * np.cos(ps), 0.0, ct * cp * np.cos(ps), -ct * sp * np.sin(ps)],
        [-st * sp * np.sin(ps), 0.0, ct * cp * np.sin(ps), ct * sp * np.cos(ps)],
        [-st * cp, 0.0, -ct * sp, 0.0],
    ])
    return pos, jac


def perturbed_s4_chart(eps: float) -> Chart:
    """Chart ``(t, theta, phi, psi)`` on S^4 in R^2 x R^3 for ``g0 + eps |z|^2 alpha (x) alpha``.

    ``g0`` is pulled back from the Euclidean metric and ``alpha = x1 dx2 - x2 dx1``
    is the rotation form on the first complex coordinate ``z = x1 + i x2``.
    """
    def metric(x):
        pos, jac = _s4_embedding(x)
        g = jac.T @ jac
        alpha = pos[0] * jac[1] - pos[1] * jac[0]
        return g + eps * (pos[0] ** 2 + pos[1] ** 2) * np.outer(alpha, alpha)

    return Chart(metric, 4, ((0, 0.0), (0, np.pi / 2), (2, 0.0), (2, np.pi)))


def _s3_metric(a):
    s1, s2 = np.sin(a[0]), np.sin(a[1])
    return np.diag([1.0, s1**2, (s1 * s2) ** 2])


def warped_s3_chart(profile: WarpProfile) -> Chart:
    """Chart ``(r, a1, a2, a3)`` for ``dr^2 + b(r)^2 g_{S^3}`` in hyperspherical angles."""
    def metric(x):
        g = np.zeros((4, 4))
        g[0, 0] = 1.0
        g[1:, 1:] = float(profile.value(np.array(x[0]))) ** 2 * _s3_metric(x[1:])
        return g

    return Chart(metric, 4, ((1, 0.0), (1, np.pi), (2, 0.0), (2, np.pi)))


def round_sphere_metric(d: int) -> MultiplyWarpedMetric:
    """Unit ``S^d`` as ``dt^2 + sin^2 t d theta^2 + cos^2 t g_{S^{d-2}}`` over (0, pi/2)."""
    if d < 3:
        raise ValueError("d >= 3 needed for the two-fiber form")
    return MultiplyWarpedMetric((0.0, np.pi / 2), ((FiberSpec.sphere(1), sin_profile()),
                                                   (FiberSpec.sphere(d - 2), cos_profile())))


def cylinder_metric(d: int, delta: float, length: float = 10.0) -> MultiplyWarpedMetric:
    return MultiplyWarpedMetric((0.0, length),
                                ((FiberSpec.sphere(d - 1), constant_profile(delta, (0.0, length))),))
