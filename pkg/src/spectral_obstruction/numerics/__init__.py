"""Foundation kernels: quadrature, exact rationals, tridiagonal eigenvalues."""
from .quadrature import (QuadratureError, QuadratureRule, QuadResult, fixed_gauss,
                         gauss_legendre_nodes, integrate)
from .rational import beta_moment_ratio, moment_ratio, wallis, wallis_coefficient
from .tridiag import (BACKENDS, DEFAULT_BACKEND, SymTridiag, count_below, eig_sym_tridiag,
                      eig_sym_tridiag_below)

__all__ = [
    "QuadratureError", "QuadratureRule", "QuadResult", "fixed_gauss", "gauss_legendre_nodes",
    "integrate", "beta_moment_ratio", "moment_ratio", "wallis", "wallis_coefficient",
    "BACKENDS", "DEFAULT_BACKEND", "SymTridiag", "count_below", "eig_sym_tridiag", "eig_sym_tridiag_below",
]
