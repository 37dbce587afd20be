# Compiled Sturm-sequence kernel; mirrors _sturm_py.py.
from libc.math cimport fabs, fmax, fmin

import numpy as np

NAME = "compiled"


cdef Py_ssize_t _count(const double[::1] d, const double[::1] e2, double x,
                       double pivmin) noexcept nogil:
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t i
    cdef Py_ssize_t c = 0
    cdef double q = d[0] - x
    if fabs(q) <= pivmin:
        q = -pivmin
    if q < 0:
        c += 1
    for i in range(1, n):
        q = d[i] - x - e2[i - 1] / q
        if fabs(q) <= pivmin:
            q = -pivmin
        if q < 0:
            c += 1
    return c


def sturm_count(diag, off2, double x, double pivmin):
    """Number of eigenvalues strictly below x."""
    cdef const double[::1] d = np.ascontiguousarray(diag, dtype=np.float64)
    cdef const double[::1] e2 = np.ascontiguousarray(off2, dtype=np.float64)
    cdef Py_ssize_t c
    with nogil:
        c = _count(d, e2, x, pivmin)
    return int(c)


def bisect(diag, off2, Py_ssize_t il, Py_ssize_t iu, double glo, double ghi,
           double abstol, double reltol, double pivmin):
    """Eigenvalues il..iu (0-based, inclusive) by bisection on Sturm counts.

    Every count also tightens the brackets of the remaining indices.
    """
    cdef const double[::1] d = np.ascontiguousarray(diag, dtype=np.float64)
    cdef const double[::1] e2 = np.ascontiguousarray(off2, dtype=np.float64)
    cdef Py_ssize_t m = iu - il + 1
    lo_arr = np.full(m, glo)
    hi_arr = np.full(m, ghi)
    out_arr = np.empty(m)
    cdef double[::1] lo = lo_arr
    cdef double[::1] hi = hi_arr
    cdef double[::1] out = out_arr
    cdef Py_ssize_t j, k, c
    cdef double a, b, mid, tol
    with nogil:
        for j in range(m):
            a = lo[j]
            b = hi[j]
            while True:
                tol = abstol + reltol * fmax(fabs(a), fabs(b))
                if b - a <= tol:
                    break
                mid = 0.5 * (a + b)
                if mid <= a or mid >= b:
                    break
                c = _count(d, e2, mid, pivmin) - il
                if c > j:
                    b = mid
                else:
                    a = mid
                for k in range(j + 1, m):
                    if k < c:
                        hi[k] = fmin(hi[k], mid)
                    else:
                        lo[k] = fmax(lo[k], mid)
            out[j] = 0.5 * (a + b)
            if j + 1 < m:
                lo[j + 1] = fmax(lo[j + 1], a)
    return out_arr
