"""Exact rational kernels: Wallis integrals and Beta-law moment ratios.

``fractions.Fraction`` is the rational type throughout (lowest terms,
positive denominator, arbitrary-precision integers).
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache


@lru_cache(maxsize=None)
def wallis_coefficient(m: int) -> Fraction:
    """Rational part of I_m = int_0^{pi/2} sin^m t dt.

    I_m equals the returned value for odd m and the returned value times pi/2
    for even m.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    c = Fraction(1)
    k = m
    while k >= 2:
        c *= Fraction(k - 1, k)
        k -= 2
    return c


def wallis(m: int) -> float:
    c = wallis_coefficient(m)
    return float(c) * (math.pi / 2) if m % 2 == 0 else float(c)


def beta_moment_ratio(d: int, j: int) -> Fraction:
    """E[q^j] / E[q^(j-1)] for q ~ Beta(1, (d-1)/2), i.e. 2j / (2j + d - 1).

    This is the law of |z|^2 = x1^2 + x2^2 under the normalized volume of the
    unit sphere S^d.
    """
    if d < 2 or j < 1:
        raise ValueError("need d >= 2 and j >= 1")
    return Fraction(2 * j, 2 * j + d - 1)


def moment_ratio(d: int, lo: int, hi: int) -> Fraction:
    """E[q^hi] / E[q^lo] as a product of consecutive ratios (hi >= lo >= 0)."""
    if hi < lo or lo < 0:
        raise ValueError("need hi >= lo >= 0")
    r = Fraction(1)
    for j in range(lo + 1, hi + 1):
        r *= beta_moment_ratio(d, j)
    return r
