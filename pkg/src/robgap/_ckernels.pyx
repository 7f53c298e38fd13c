# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch solver for the per-dimension robust least-squares objective.

F(w) = sum_i (|y_i - w x_i| + eps |w|)^2 is convex and quadratic between the
breakpoints {0} U {y_i / x_i}.  Each row of the batch is solved by minimising
the quadratic on every segment and keeping the best candidate; ties go to the
smallest |w|, then the smallest w.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, INFINITY
from libc.stdlib cimport malloc, free, qsort

cnp.import_array()

cdef double TIE_RTOL = 1e-12


cdef int _cmp_double(const void* a, const void* b) noexcept nogil:
    cdef double x = (<const double*>a)[0]
    cdef double y = (<const double*>b)[0]
    if x < y:
        return -1
    if x > y:
        return 1
    return 0


cdef inline double _objective(const double* x, const double* y, Py_ssize_t n,
                              double eps, double w) noexcept nogil:
    cdef double total = 0.0, r
    cdef Py_ssize_t i
    for i in range(n):
        r = fabs(y[i] - w * x[i]) + eps * fabs(w)
        total += r * r
    return total


cdef inline double _sgn(double v) noexcept nogil:
    if v > 0:
        return 1.0
    if v < 0:
        return -1.0
    return 0.0


cdef inline bint _prefer(double w, double other) noexcept nogil:
    # smaller |w| first, then smaller w
    if fabs(w) != fabs(other):
        return fabs(w) < fabs(other)
    return w < other


cdef double _solve_row(const double* x, const double* y, Py_ssize_t n, double eps,
                       double* bp, double* cw, double* cf) noexcept nogil:
    cdef Py_ssize_t i, k, m = 0, c = 0
    cdef double lo, hi, probe, t, s, coef, A, B, v
    cdef double min_f = INFINITY
    cdef double best_w

    bp[m] = 0.0
    m += 1
    for i in range(n):
        if x[i] != 0.0:
            bp[m] = y[i] / x[i]
            m += 1
    qsort(bp, m, sizeof(double), _cmp_double)

    for k in range(m):
        cw[c] = bp[k]
        c += 1
    for k in range(m + 1):
        lo = bp[k - 1] if k > 0 else -INFINITY
        hi = bp[k] if k < m else INFINITY
        if k == 0:
            probe = hi - 1.0
        elif k == m:
            probe = lo + 1.0
        else:
            probe = 0.5 * (lo + hi)
        if not (lo < probe < hi):
            continue
        # on this segment every residual sign and sign(w) are fixed
        t = _sgn(probe)
        A = 0.0
        B = 0.0
        for i in range(n):
            s = _sgn(y[i] - probe * x[i])
            coef = eps * t - s * x[i]
            A += coef * coef
            B += s * y[i] * coef
        if A <= 0.0:
            continue
        v = -B / A
        if v < lo:
            v = lo
        elif v > hi:
            v = hi
        cw[c] = v
        c += 1

    for k in range(c):
        cf[k] = _objective(x, y, n, eps, cw[k])
        if cf[k] < min_f:
            min_f = cf[k]
    best_w = INFINITY
    for k in range(c):
        if cf[k] <= min_f + TIE_RTOL * min_f and _prefer(cw[k], best_w):
            best_w = cw[k]
    return best_w


def robust_fit_batch(xs, ys, double eps):
    """Row-wise robust 1-d fit for arrays of shape (trials, n)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] X = np.ascontiguousarray(xs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] Y = np.ascontiguousarray(ys, dtype=np.float64)
    if X.shape[0] != Y.shape[0] or X.shape[1] != Y.shape[1]:
        raise ValueError("xs and ys must have the same shape")
    cdef Py_ssize_t T = X.shape[0], n = X.shape[1], r
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(T, dtype=np.float64)
    cdef double* bp = <double*>malloc((n + 1) * sizeof(double))
    cdef double* cw = <double*>malloc((2 * n + 3) * sizeof(double))
    cdef double* cf = <double*>malloc((2 * n + 3) * sizeof(double))
    cdef const double* xp = &X[0, 0] if T > 0 and n > 0 else NULL
    cdef const double* yp = &Y[0, 0] if T > 0 and n > 0 else NULL
    cdef double* op = &out[0] if T > 0 else NULL
    if bp == NULL or cw == NULL or cf == NULL:
        free(bp)
        free(cw)
        free(cf)
        raise MemoryError()
    try:
        with nogil:
            for r in range(T):
                op[r] = _solve_row(xp + r * n, yp + r * n, n, eps, bp, cw, cf)
    finally:
        free(bp)
        free(cw)
        free(cf)
    return out
