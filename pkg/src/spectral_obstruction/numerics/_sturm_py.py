"""Pure-Python (numpy) Sturm-sequence kernel; same contract as ``_sturm.pyx``.

The recurrence runs over matrix rows in Python, vectorized across all shifts
being bisected at once.
"""
import numpy as np

NAME = "python"


def _counts(d, e2, xs, pivmin):
    q = d[0] - xs
    q[np.abs(q) <= pivmin] = -pivmin
    c = (q < 0).astype(np.int64)
    for i in range(1, d.shape[0]):
        q = d[i] - xs - e2[i - 1] / q
        q[np.abs(q) <= pivmin] = -pivmin
        c += q < 0
    return c


def sturm_count(diag, off2, x, pivmin):
    d = np.asarray(diag, dtype=float)
    e2 = np.asarray(off2, dtype=float)
    return int(_counts(d, e2, np.array([float(x)]), pivmin)[0])


def bisect(diag, off2, il, iu, glo, ghi, abstol, reltol, pivmin):
    d = np.asarray(diag, dtype=float)
    e2 = np.asarray(off2, dtype=float)
    idx = np.arange(il, iu + 1)
    lo = np.full(idx.size, float(glo))
    hi = np.full(idx.size, float(ghi))
    active = np.ones(idx.size, dtype=bool)
    while active.any():
        a = lo[active]
        b = hi[active]
        mid = 0.5 * (a + b)
        tol = abstol + reltol * np.maximum(np.abs(a), np.abs(b))
        done = (b - a <= tol) | (mid <= a) | (mid >= b)
        sel = np.flatnonzero(active)
        active[sel[done]] = False
        sel = sel[~done]
        if sel.size == 0:
            break
        mid = mid[~done]
        below = _counts(d, e2, mid.copy(), pivmin) > idx[sel]
        hi[sel[below]] = mid[below]
        lo[sel[~below]] = mid[~below]
    return 0.5 * (lo + hi)
