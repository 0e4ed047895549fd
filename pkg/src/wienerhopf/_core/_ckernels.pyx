# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Back-substitution for Stein and Sylvester equations in triangular form.

Both routines expect upper triangular ``TA`` (n x n) and ``TB`` (k x k), as
produced by a complex Schur decomposition, and solve column by column.
"""
import numpy as np


def stein_triangular(const double complex[:, ::1] TA,
                     const double complex[:, ::1] TB,
                     const double complex[:, ::1] F):
    """Solve ``Y - TA @ Y @ TB = F``."""
    cdef Py_ssize_t n = TA.shape[0]
    cdef Py_ssize_t k = TB.shape[0]
    cdef Py_ssize_t i, j, p, q
    cdef double complex s, t
    Y = np.zeros((n, k), dtype=np.complex128)
    W = np.zeros(n, dtype=np.complex128)
    cdef double complex[:, ::1] y = Y
    cdef double complex[::1] w = W
    for j in range(k):
        t = TB[j, j]
        for p in range(n):
            s = 0
            for i in range(j):
                s = s + y[p, i] * TB[i, j]
            w[p] = s
        for p in range(n - 1, -1, -1):
            s = F[p, j]
            for q in range(p, n):
                s = s + TA[p, q] * w[q]
            for q in range(p + 1, n):
                s = s + t * TA[p, q] * y[q, j]
            y[p, j] = s / (1 - t * TA[p, p])
    return Y


def sylvester_triangular(const double complex[:, ::1] TA,
                         const double complex[:, ::1] TB,
                         const double complex[:, ::1] F):
    """Solve ``TA @ Y - Y @ TB = F``."""
    cdef Py_ssize_t n = TA.shape[0]
    cdef Py_ssize_t k = TB.shape[0]
    cdef Py_ssize_t i, j, p, q
    cdef double complex s, t
    Y = np.zeros((n, k), dtype=np.complex128)
    cdef double complex[:, ::1] y = Y
    for j in range(k):
        t = TB[j, j]
        for p in range(n - 1, -1, -1):
            s = F[p, j]
            for i in range(j):
                s = s + y[p, i] * TB[i, j]
            for q in range(p + 1, n):
                s = s - TA[p, q] * y[q, j]
            y[p, j] = s / (TA[p, p] - t)
    return Y
