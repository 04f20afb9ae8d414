# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled direction-grid scan for the brute-force oracle."""

from libc.math cimport sqrt, fabs, cos, sin, INFINITY

import numpy as np


cdef inline double _quad(const double[:, ::1] A, const double* d, int n) noexcept nogil:
    cdef double s = 0.0, r
    cdef int a, b
    for a in range(n):
        r = 0.0
        for b in range(n):
            r += A[a, b] * d[b]
        s += d[a] * r
    return s


cdef inline int _visit(const double[:, ::1] A0, const double[:, ::1] A1,
                       const double[:, ::1] A2, const double* d, int n, int equality,
                       double feas_tol, double band, double* best) noexcept nogil:
    """Returns 1 if feasible; updates best[0] when strictly better."""
    cdef double q1 = _quad(A1, d, n)
    cdef double q0, q2
    if q1 <= 1e-14:
        return 0
    q2 = _quad(A2, d, n) / q1
    if equality:
        if fabs(q2 - 1.0) > band:
            return 0
    elif q2 > 1.0 + feas_tol:
        return 0
    q0 = _quad(A0, d, n) / q1
    if q0 < best[0]:
        best[0] = q0
        return 2
    return 1


def grid_scan(A0, A1, A2, long N, bint equality, double feas_tol, double band):
    """Scan the hemisphere grid with ``N`` angular steps on ``[0, pi]``.

    Returns ``(best_value, argmin_direction, n_feasible)``; the argmin is
    the first strict minimum in scan order.
    """
    cdef const double[:, ::1] a0 = np.ascontiguousarray(A0, dtype=np.float64)
    cdef const double[:, ::1] a1 = np.ascontiguousarray(A1, dtype=np.float64)
    cdef const double[:, ::1] a2 = np.ascontiguousarray(A2, dtype=np.float64)
    cdef int n = a0.shape[0]
    if n < 3 or n > 4:
        raise ValueError("grid_scan supports n = 3 or 4")
    cdef double h = np.pi / N
    ct_np = np.cos(h * np.arange(N + 1))
    st_np = np.sin(h * np.arange(N + 1))
    cdef const double[::1] ct = ct_np
    cdef const double[::1] st = st_np
    cdef double d[4]
    cdef double bd[4]
    cdef double best = INFINITY
    cdef long count = 0
    cdef long i, k, j
    cdef int r, t
    with nogil:
        if n == 3:
            for i in range(N + 1):
                for j in range(N):
                    d[0] = ct[i]
                    d[1] = st[i] * ct[j]
                    d[2] = st[i] * st[j]
                    r = _visit(a0, a1, a2, d, n, equality, feas_tol, band, &best)
                    if r:
                        count += 1
                        if r == 2:
                            for t in range(n):
                                bd[t] = d[t]
        else:
            for i in range(N + 1):
                for k in range(N + 1):
                    for j in range(N):
                        d[0] = ct[i]
                        d[1] = st[i] * ct[k]
                        d[2] = st[i] * st[k] * ct[j]
                        d[3] = st[i] * st[k] * st[j]
                        r = _visit(a0, a1, a2, d, n, equality, feas_tol, band, &best)
                        if r:
                            count += 1
                            if r == 2:
                                for t in range(n):
                                    bd[t] = d[t]
    if count == 0:
        return INFINITY, None, 0
    return best, np.array([bd[t] for t in range(n)]), count
