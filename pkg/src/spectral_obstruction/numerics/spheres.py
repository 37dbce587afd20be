"""Closed-form integrals over unit spheres."""
from math import gamma, pi

import numpy as np


def sphere_area(m: int) -> float:
    """Volume of the unit sphere ``S^m`` in ``R^{m+1}``."""
    return 2 * pi ** ((m + 1) / 2) / gamma((m + 1) / 2)


def sphere_monomial_integral(powers) -> float:
    """``int_{S^m} x_1^{p_1} ... x_{m+1}^{p_{m+1}}`` with ``m + 1 = len(powers)``.

    Zero unless every power is even; otherwise ``2 prod Gamma(b_i) / Gamma(sum b_i)``
    with ``b_i = (p_i + 1)/2``.
    """
    if any(p % 2 for p in powers):
        return 0.0
    b = [(p + 1) / 2 for p in powers]
    return 2 * float(np.prod([gamma(x) for x in b])) / gamma(sum(b))
