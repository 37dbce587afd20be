"""Symmetric tridiagonal matrices and their lowest eigenvalues.

Eigenvalues come from bisection on Sturm sequences.  The inner loop lives in
a compiled extension (``_sturm``) when it was built; otherwise, or when
``SPECTRAL_OBSTRUCTION_PURE_PYTHON`` is set, the numpy fallback is used.
"""
from __future__ import annotations

import os
import sys
from dataclasses import dataclass
from types import ModuleType

import numpy as np

from . import _sturm_py

_EPS = np.finfo(float).eps
_SAFMIN = np.finfo(float).tiny


def _load_backends() -> dict[str, ModuleType]:
    backends = {"python": _sturm_py}
    try:
        from . import _sturm  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        backends["compiled"] = _sturm
    return backends


BACKENDS = _load_backends()
if os.environ.get("SPECTRAL_OBSTRUCTION_PURE_PYTHON") or "compiled" not in BACKENDS:
    DEFAULT_BACKEND = "python"
else:
    DEFAULT_BACKEND = "compiled"


def _kernel(backend: str | None) -> ModuleType:
    name = backend or DEFAULT_BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None


@dataclass(frozen=True)
class SymTridiag:
    diagonal: np.ndarray
    off_diagonal: np.ndarray

    def __post_init__(self):
        d = np.array(self.diagonal, dtype=float).ravel()
        e = np.array(self.off_diagonal, dtype=float).ravel()
        if d.size < 1:
            raise ValueError("SymTridiag needs n >= 1")
        if e.size != d.size - 1:
            raise ValueError(f"off_diagonal length {e.size} != n-1 = {d.size - 1}")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise ValueError("non-finite matrix entries")
        d.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "diagonal", d)
        object.__setattr__(self, "off_diagonal", e)

    @property
    def n(self) -> int:
        return self.diagonal.size

    def gershgorin(self) -> tuple[float, float]:
        r = np.zeros(self.n)
        ae = np.abs(self.off_diagonal)
        r[:-1] += ae
        r[1:] += ae
        return float(np.min(self.diagonal - r)), float(np.max(self.diagonal + r))

    def norm(self) -> float:
        """Gershgorin bound on the spectral norm."""
        lo, hi = self.gershgorin()
        return max(abs(lo), abs(hi))

    def dense(self) -> np.ndarray:
        return (np.diag(self.diagonal) + np.diag(self.off_diagonal, 1)
                + np.diag(self.off_diagonal, -1))

    def _pivmin(self) -> float:
        e2max = float(np.max(self.off_diagonal**2)) if self.n > 1 else 0.0
        return _SAFMIN * max(1.0, e2max)


def count_below(m: SymTridiag, x: float, backend: str | None = None) -> int:
    """Number of eigenvalues of ``m`` strictly less than ``x``."""
    return _kernel(backend).sturm_count(m.diagonal, m.off_diagonal**2, float(x), m._pivmin())


def eig_sym_tridiag(m: SymTridiag, count: int, backend: str | None = None,
                    abstol: float | None = None) -> np.ndarray:
    """The ``count`` smallest eigenvalues of ``m`` in nondecreasing order.

    Brackets are bisected until their width is below
    ``abstol + 2 eps |lambda|``; ``abstol`` defaults to ``eps * ||m||``.
    """
    if not 1 <= count <= m.n:
        if count == 0:
            return np.empty(0)
        raise ValueError(f"count={count} outside [1, n={m.n}]")
    norm = m.norm()
    pivmin = m._pivmin()
    glo, ghi = m.gershgorin()
    slack = 2.1 * _EPS * norm + 2.1 * pivmin
    if abstol is None:
        abstol = _EPS * max(norm, _SAFMIN)
    vals = _kernel(backend).bisect(m.diagonal, m.off_diagonal**2, 0, count - 1,
                                   glo - slack, ghi + slack, abstol, 2 * _EPS, pivmin)
    return np.maximum.accumulate(np.asarray(vals, dtype=float))


def eig_sym_tridiag_below(m: SymTridiag, upper: float, backend: str | None = None) -> np.ndarray:
    """All eigenvalues of ``m`` strictly below ``upper``."""
    c = count_below(m, upper, backend)
    return eig_sym_tridiag(m, c, backend) if c else np.empty(0)


def backend_info() -> str:
    return f"{DEFAULT_BACKEND} (available: {', '.join(sorted(BACKENDS))}; python {sys.version.split()[0]})"
