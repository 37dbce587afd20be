"""Spectra of rotationally symmetric (weighted) manifolds by separation of variables.

Each spherical-harmonic sector reduces the weighted Laplacian to a 1-D problem

    -(w u')' / w + q_pot u = lambda u     on (t0, t1),

discretized with piecewise-linear elements on a uniform grid and a lumped
(diagonal) mass matrix, so that ``M^{-1/2} K M^{-1/2}`` is symmetric tridiagonal.
At an endpoint where ``q_pot`` blows up the nodal value is pinned to zero; at an
endpoint where only the weight degenerates nothing is imposed.  Errors are
``O(h^2)`` and Richardson extrapolation over ``n, 2n`` removes the leading term.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .numerics import SymTridiag, count_below, eig_sym_tridiag, gauss_legendre_nodes
from .sphere_cex import harmonic_dim, perturbed_profile
from .warped_geometry import RadialWeightedManifold

NATURAL = "natural"
DIRICHLET = "dirichlet"
_ELEMENT_NODES = 6
TIE_DECIMALS = 12


@dataclass(frozen=True)
class SectorSpec:
    interval: tuple[float, float]
    weight: Callable[[np.ndarray], np.ndarray]
    potential: Callable[[np.ndarray], np.ndarray]
    multiplicity: int
    label: tuple
    left_bc: str = NATURAL
    right_bc: str = NATURAL
    lower_bound: float = 0.0

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be >= 1")
        for bc in (self.left_bc, self.right_bc):
            if bc not in (NATURAL, DIRICHLET):
                raise ValueError(f"unknown boundary condition {bc!r}")


def discretize_sector(sector: SectorSpec, n: int) -> SymTridiag:
    """Lumped-mass P1 Galerkin matrix of the sector problem with ``n`` elements."""
    if n < 16:
        raise ValueError("n must be >= 16")
    t0, t1 = sector.interval
    h = (t1 - t0) / n
    t = t0 + h * np.arange(n + 1)
    x, wq = gauss_legendre_nodes(_ELEMENT_NODES)
    pts = t[:-1, None] + 0.5 * h * (x + 1)
    wts = 0.5 * h * wq
    w = sector.weight(pts)
    we = (w * wts).sum(axis=1)
    right = (pts - t[:-1, None]) / h
    mass = np.zeros(n + 1)
    mass[:-1] += (w * (1 - right) * wts).sum(axis=1)
    mass[1:] += (w * right * wts).sum(axis=1)
    stiff = np.zeros(n + 1)
    stiff[:-1] += we / h**2
    stiff[1:] += we / h**2
    off = -we / h**2
    lo = 1 if sector.left_bc == DIRICHLET else 0
    hi = n if sector.right_bc == DIRICHLET else n + 1
    keep = slice(lo, hi)
    mass, stiff, off = mass[keep], stiff[keep], off[lo:hi - 1]
    if np.any(~(mass > 0)) or np.any(~(we > 0)):
        raise ValueError(f"weight not positive in the interior of sector {sector.label}")
    pot = sector.potential(t[keep])
    if not np.all(np.isfinite(pot)):
        raise ValueError(f"potential singular at a free node of sector {sector.label}")
    s = 1 / np.sqrt(mass)
    return SymTridiag((stiff + pot * mass) * s * s, off * s[:-1] * s[1:])


class SectorEigs(NamedTuple):
    values: np.ndarray
    errors: np.ndarray


def sector_eigs(sector: SectorSpec, n: int, count: int | None = None, upper: float | None = None,
                extrapolate: bool = True) -> SectorEigs:
    """Lowest eigenvalues of one sector: ``count`` of them, or all below ``upper``.

    With ``extrapolate`` the grids ``n`` and ``2n`` are combined assuming an
    ``O(n^-2)`` error; ``errors`` is ``|lambda_2n - lambda_n| / 3``, the size of
    the correction applied, plus the eigensolver's rounding floor ``4 eps ||A||``.
    """
    if (count is None) == (upper is None):
        raise ValueError("give exactly one of count, upper")
    fine = discretize_sector(sector, 2 * n if extrapolate else n)
    if count is None:
        count = count_below(fine, upper)
        if count == 0:
            return SectorEigs(np.empty(0), np.empty(0))
        count = min(count + 2, fine.n)  # extrapolation can move values across upper
    lf = eig_sym_tridiag(fine, min(count, fine.n))
    floor = 4 * np.finfo(float).eps * fine.norm()
    if not extrapolate:
        vals, errs = lf, np.full_like(lf, floor)
    else:
        coarse = discretize_sector(sector, n)
        m = min(count, coarse.n)
        lc = eig_sym_tridiag(coarse, m)
        lf = lf[:m]
        vals = (4 * lf - lc) / 3
        errs = np.abs(lf - lc) / 3 + floor
    if upper is not None:
        keep = vals <= upper
        vals, errs = vals[keep], errs[keep]
    return SectorEigs(vals, errs)


# -- geometries --------------------------------------------------------------

class SectorSet(NamedTuple):
    sectors: list[SectorSpec]
    lambda_max: float


@dataclass(frozen=True)
class SphereGeometry:
    """``S^d`` with the circle-stretched metric (``eps = 0`` is the unit round sphere).

    Sectors are indexed by the circle frequency ``m >= 0`` and the harmonic degree
    ``l'`` on ``S^{d-2}``.
    """

    d: int
    eps: float = 0.0
    label: str = "sphere"
    m_cap: int | None = None
    l_cap: int | None = None

    def enumerate_sectors(self, lambda_max: float) -> SectorSet:
        if lambda_max <= 0:
            raise ValueError("lambda_max must be positive")
        d, eps = self.d, self.eps
        a = perturbed_profile(eps).value
        sup_a2 = 1 + eps
        out = []
        certified = lambda_max
        m = 0
        while m * m / sup_a2 <= lambda_max:
            lp = 0
            while True:
                bound = m * m / sup_a2 + lp * (lp + d - 3)
                if bound > lambda_max:
                    break
                if _capped(m, self.m_cap) or _capped(lp, self.l_cap):
                    certified = min(certified, bound)
                    lp += 1
                    continue
                mult = (2 if m else 1) * harmonic_dim(d - 2, lp)
                w = lambda t: a(t) * np.cos(t) ** (d - 2)

                def pot(t, m=m, lp=lp):
                    with np.errstate(divide="ignore"):
                        out_ = np.zeros_like(t, dtype=float)
                        if m:
                            out_ = out_ + m * m / a(t) ** 2
                        if lp:
                            out_ = out_ + lp * (lp + d - 3) / np.cos(t) ** 2
                    return out_

                out.append(SectorSpec((0.0, np.pi / 2), w, pot, mult, (m, lp),
                                      DIRICHLET if m else NATURAL,
                                      DIRICHLET if lp else NATURAL, bound))
                lp += 1
                if d == 2:
                    break
            m += 1
        return SectorSet(out, certified)

    def initial_lambda_max(self, K: int) -> float:
        l, total = 0, 0
        while total < K:
            total += harmonic_dim(self.d, l)
            l += 1
        return 1.05 * (l - 1) * (l + self.d - 2) + 1.0


@dataclass(frozen=True)
class CylinderGeometry:
    """A radial weighted manifold ``dr^2 + rho^2 g_{S^{d-1}}``, ``e^{-V}``, truncated at ``Rmax``.

    ``rho_sup`` bounds ``rho`` on ``(0, Rmax)`` and enters the sector cutoff.
    """

    manifold: RadialWeightedManifold
    rmax: float
    rho_sup: float
    label: str = "cylinder"
    l_cap: int | None = None

    def enumerate_sectors(self, lambda_max: float) -> SectorSet:
        if lambda_max <= 0:
            raise ValueError("lambda_max must be positive")
        man, d = self.manifold, self.manifold.dim
        rho = man.profile.value
        out = []
        certified = lambda_max
        l = 0
        while l * (l + d - 2) / self.rho_sup**2 <= lambda_max:
            c = l * (l + d - 2)
            if _capped(l, self.l_cap):
                certified = min(certified, c / self.rho_sup**2)
                break

            def pot(r, c=c):
                with np.errstate(divide="ignore"):
                    return c / rho(r) ** 2 if c else np.zeros_like(r, dtype=float)

            out.append(SectorSpec((0.0, self.rmax), man.density, pot, harmonic_dim(d - 1, l), (l,),
                                  DIRICHLET if l else NATURAL, DIRICHLET, c / self.rho_sup**2))
            l += 1
        return SectorSet(out, certified)

    def initial_lambda_max(self, K: int) -> float:
        return 3.0


def _capped(index: int, cap: int | None) -> bool:
    return cap is not None and index > cap


def cylinder_geometry(man: RadialWeightedManifold, rmax: float, rho_sup: float | None = None,
                      label: str = "cylinder", l_cap: int | None = None) -> CylinderGeometry:
    if rho_sup is None:
        grid = np.linspace(0.0, rmax, 20001)
        rho_sup = float(np.max(man.profile.value(grid)))
        # the profile is concave and nondecreasing for both instances; keep a guard anyway
        rho_sup *= 1 + 1e-12
    return CylinderGeometry(man, rmax, rho_sup, label, l_cap)


def enumerate_sectors(geometry, lambda_max: float) -> SectorSet:
    return geometry.enumerate_sectors(lambda_max)


# -- spectra -----------------------------------------------------------------

class Entry(NamedTuple):
    value: float
    multiplicity: int
    label: tuple
    error: float = 0.0


@dataclass
class Spectrum:
    """Nondecreasing eigenvalues with multiplicities; ``lambda_k`` counts multiplicity from 1.

    ``truncation_lambda`` certifies completeness: every eigenvalue at or below it
    is listed.
    """

    entries: list[Entry]
    truncation_lambda: float = np.inf
    source: str = ""

    def __post_init__(self):
        self.entries = sorted(self.entries, key=lambda e: (round(e.value, TIE_DECIMALS), e.label))

    def values(self) -> np.ndarray:
        if not self.entries:
            return np.empty(0)
        return np.repeat([e.value for e in self.entries], [e.multiplicity for e in self.entries])

    def __len__(self) -> int:
        return sum(e.multiplicity for e in self.entries)

    def _entry(self, k: int) -> Entry:
        if k < 1:
            raise IndexError("indices start at 1")
        seen = 0
        for e in self.entries:
            seen += e.multiplicity
            if seen >= k:
                return e
        raise IndexError(f"spectrum holds {seen} eigenvalues, index {k} requested")

    def lambda_k(self, k: int) -> float:
        return self._entry(k).value

    def error_bound(self, k: int) -> float:
        return self._entry(k).error

    def label_k(self, k: int) -> tuple:
        return self._entry(k).label

    def distinct(self, rtol: float = 1e-6, atol: float = 1e-8) -> list[tuple[float, int]]:
        """Cluster nearly equal values: (mean value, total multiplicity)."""
        out: list[list] = []
        for e in self.entries:
            if out and abs(e.value - out[-1][0]) <= atol + rtol * abs(out[-1][0]):
                v, m = out[-1]
                out[-1] = [(v * m + e.value * e.multiplicity) / (m + e.multiplicity), m + e.multiplicity]
            else:
                out.append([e.value, e.multiplicity])
        return [(float(v), int(m)) for v, m in out]

    def truncated(self, K: int) -> "Spectrum":
        """First ``K`` eigenvalues (the last entry's multiplicity is cut as needed)."""
        out, seen = [], 0
        for e in self.entries:
            if seen >= K:
                break
            take = min(e.multiplicity, K - seen)
            out.append(e._replace(multiplicity=take))
            seen += take
        return Spectrum(out, self.truncation_lambda, self.source)


class InsufficientCertificate(ValueError):
    def __init__(self, found: int, needed: int, lambda_max: float):
        super().__init__(f"only {found} eigenvalues certified below lambda_max={lambda_max:g}; "
                         f"{needed} needed: raise lambda_max")
        self.found, self.needed, self.lambda_max = found, needed, lambda_max


def assemble_spectrum(solved: Sequence[tuple[SectorSpec, SectorEigs]], K_needed: int,
                      lambda_max: float, source: str = "") -> Spectrum:
    """Merge sector eigenvalues (each repeated by its sector multiplicity) into one spectrum."""
    entries = [Entry(float(v), s.multiplicity, s.label, float(e))
               for s, res in solved for v, e in zip(res.values, res.errors) if v <= lambda_max]
    spec = Spectrum(entries, lambda_max, source)
    if len(spec) < K_needed:
        raise InsufficientCertificate(len(spec), K_needed, lambda_max)
    return spec


def solve_sectors(sectors: Sequence[SectorSpec], lambda_max: float, n: int,
                  extrapolate: bool = True, workers: int = 1):
    run = lambda s: (s, sector_eigs(s, n, upper=lambda_max, extrapolate=extrapolate))
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(run, sectors))
    return [run(s) for s in sectors]


def compute_spectrum(geometry, K_needed: int, n: int = 2000, lambda_max: float | None = None,
                     extrapolate: bool = True, grow: float = 1.5, workers: int = 1,
                     max_rounds: int = 20) -> Spectrum:
    """All eigenvalues up to a certified ``lambda_max`` holding at least ``K_needed`` values.

    When ``lambda_max`` is not given it starts from a geometry-specific guess and
    grows by ``grow`` until enough eigenvalues are certified.
    """
    auto = lambda_max is None
    lam = geometry.initial_lambda_max(K_needed) if auto else lambda_max
    for _ in range(max_rounds):
        sectors, certified = geometry.enumerate_sectors(lam)
        solved = solve_sectors(sectors, certified, n, extrapolate, workers)
        try:
            return assemble_spectrum(solved, K_needed, certified, geometry.label)
        except InsufficientCertificate:
            if not auto:
                raise
            lam *= grow
    raise InsufficientCertificate(0, K_needed, lam)


# -- closed-form spectra -----------------------------------------------------

def round_sphere_spectrum(d: int, rho: float, K: int) -> Spectrum:
    """Round ``S^d`` scaled to Ricci ``rho``: ``(rho/(d-1)) l (l+d-1)`` with ``dim H_l``."""
    entries, total, l = [], 0, 0
    while total < K:
        entries.append(Entry(rho / (d - 1) * l * (l + d - 1), harmonic_dim(d, l), ("l", l)))
        total += harmonic_dim(d, l)
        l += 1
    return Spectrum(entries, entries[-1].value, f"round_sphere(d={d}, rho={rho:.17g})")


def ornstein_uhlenbeck_spectrum(d: int, K: int) -> Spectrum:
    """Standard Gaussian on ``R^d``: eigenvalue ``n`` with multiplicity ``C(n+d-1, d-1)``."""
    entries, total, n = [], 0, 0
    while total < K:
        m = comb(n + d - 1, d - 1)
        entries.append(Entry(float(n), m, ("n", n)))
        total += m
        n += 1
    return Spectrum(entries, entries[-1].value, f"ornstein_uhlenbeck(d={d})")


def product_torus_spectrum(r1: float, r2: float, K: int) -> Spectrum:
    """Flat torus ``S^1(r1) x S^1(r2)``: ``(p/r1)^2 + (q/r2)^2`` over integer pairs."""
    lam = 1.0
    while True:
        P, Q = int(np.floor(np.sqrt(lam) * r1)), int(np.floor(np.sqrt(lam) * r2))
        p, q = np.meshgrid(np.arange(-P, P + 1), np.arange(-Q, Q + 1), indexing="ij")
        vals = (p / r1) ** 2 + (q / r2) ** 2
        vals = np.sort(vals[vals <= lam])
        if vals.size >= K:
            break
        lam *= 2
    uniq, counts = np.unique(np.round(vals, TIE_DECIMALS), return_counts=True)
    entries = [Entry(float(v), int(c), ("torus", i)) for i, (v, c) in enumerate(zip(uniq, counts))]
    return Spectrum(entries, lam, f"product_torus({r1:.17g}, {r2:.17g})")


def reference_spectrum(kind: str, K: int, **kw) -> Spectrum:
    if K < 1:
        raise ValueError("K must be >= 1")
    if kind == "round_sphere":
        return round_sphere_spectrum(kw["d"], kw.get("rho", kw["d"] - 1), K)
    if kind == "ornstein_uhlenbeck":
        return ornstein_uhlenbeck_spectrum(kw["d"], K)
    if kind == "product_torus":
        return product_torus_spectrum(kw["r1"], kw["r2"], K)
    raise ValueError(f"unknown reference spectrum {kind!r}")


# -- the comparison principle ------------------------------------------------

class ComparisonResult(NamedTuple):
    verdict: str  # "dominates" or "violated"
    first_violation_index: int | None
    gap_at_violation: float | None
    horizon: int
    source_value: float | None = None
    target_value: float | None = None


def compare_spectra(source: Spectrum, target: Spectrum, L: float = 1.0, horizon: int | None = None,
                    atol: float = 1e-8, rtol: float = 1e-9) -> ComparisonResult:
    """Check ``target_k >= source_k / L^2`` for k = 1..horizon.

    A violation needs ``source_k/L^2 - target_k`` to exceed ``atol + rtol |source_k/L^2|``,
    so values equal up to numerical noise are not flagged.
    """
    if L <= 0:
        raise ValueError("L must be positive")
    s, t = source.values(), target.values()
    avail = min(s.size, t.size)
    if horizon is None:
        horizon = avail
    elif horizon > avail:
        raise ValueError(f"horizon {horizon} exceeds available indices "
                         f"(source {s.size}, target {t.size})")
    scaled = s[:horizon] / L**2
    gap = scaled - t[:horizon]
    bad = np.flatnonzero(gap > atol + rtol * np.abs(scaled))
    if bad.size == 0:
        return ComparisonResult("dominates", None, None, horizon)
    k = int(bad[0])
    return ComparisonResult("violated", k + 1, float(gap[k]), horizon, float(s[k]), float(t[k]))
