# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.

Every routine here has a pure-Python twin in ``_kernels_py`` with the same
signature; ``sparse_ssk.kernels`` picks one at import time.
"""

from libc.math cimport log, log1p, atan2, fabs, hypot, copysign, pow

import numpy as np


cdef inline void _neumaier(double *s, double *c, double x) nogil:
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


def gap_log_sum(double u, const double[::1] gaps):
    """Compensated sum of log(u + gaps[i])."""
    cdef Py_ssize_t i, n = gaps.shape[0]
    cdef double s = 0.0, c = 0.0
    with nogil:
        for i in range(n):
            _neumaier(&s, &c, log(u + gaps[i]))
    return s + c


def gap_inv_power_sum(double u, const double[::1] gaps, int ell):
    """Compensated sum of (u + gaps[i])**(-ell)."""
    cdef Py_ssize_t i, n = gaps.shape[0]
    cdef double s = 0.0, c = 0.0, w
    with nogil:
        if ell == 1:
            for i in range(n):
                _neumaier(&s, &c, 1.0 / (u + gaps[i]))
        elif ell == 2:
            for i in range(n):
                w = 1.0 / (u + gaps[i])
                _neumaier(&s, &c, w * w)
        else:
            for i in range(n):
                _neumaier(&s, &c, pow(u + gaps[i], -ell))
    return s + c


def contour_log1p_sum(double x, double y, const double[::1] dist):
    """Compensated sum of the principal log(1 + (x + iy)/dist[i]).

    ``dist`` holds the positive distances gamma - lambda_i, so the summand is
    log((z - lambda_i)/(gamma - lambda_i)) with z = gamma + x + iy.
    Returns the (real, imaginary) pair.
    """
    cdef Py_ssize_t i, n = dist.shape[0]
    cdef double sr = 0.0, cr = 0.0, si = 0.0, ci = 0.0
    cdef double a, wr, wi
    with nogil:
        for i in range(n):
            a = dist[i]
            wr = x / a
            wi = y / a
            # log1p near w = 0, hypot elsewhere (no cancellation when 1 + w ~ 0)
            if fabs(wr) < 0.5 and fabs(wi) < 0.5:
                _neumaier(&sr, &cr, 0.5 * log1p(wr * (2.0 + wr) + wi * wi))
            else:
                _neumaier(&sr, &cr, log(hypot(1.0 + wr, wi)))
            _neumaier(&si, &ci, atan2(wi, 1.0 + wr))
    return sr + cr, si + ci


def tridiagonal_ql(double[::1] d, double[::1] e, long max_sweeps):
    """Eigenvalues of a symmetric tridiagonal matrix by implicit QL.

    ``d`` (length n) is the diagonal and ``e`` (length n) the subdiagonal with
    e[i] coupling d[i] and d[i+1]; e[n-1] is ignored. Both are overwritten.
    Returns (sweeps_used, failed_index); failed_index is -1 on success.
    """
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t l, m, i
    cdef long sweeps = 0
    cdef double dd, g, r, s, c, p, f, b
    cdef double eps = 2.220446049250313e-16
    cdef bint deflated
    if n == 0:
        return 0, -1
    e[n - 1] = 0.0
    with nogil:
        for l in range(n):
            while True:
                m = l
                while m < n - 1:
                    dd = fabs(d[m]) + fabs(d[m + 1])
                    if fabs(e[m]) <= eps * dd:
                        break
                    m += 1
                if m == l:
                    break
                sweeps += 1
                if sweeps > max_sweeps:
                    with gil:
                        return sweeps, l
                g = (d[l + 1] - d[l]) / (2.0 * e[l])
                r = hypot(g, 1.0)
                g = d[m] - d[l] + e[l] / (g + copysign(r, g))
                s = 1.0
                c = 1.0
                p = 0.0
                deflated = False
                i = m - 1
                while i >= l:
                    f = s * e[i]
                    b = c * e[i]
                    r = hypot(f, g)
                    e[i + 1] = r
                    if r == 0.0:
                        d[i + 1] -= p
                        e[m] = 0.0
                        deflated = True
                        break
                    s = f / r
                    c = g / r
                    g = d[i + 1] - p
                    r = (d[i] - g) * s + 2.0 * c * b
                    p = s * r
                    d[i + 1] = g + p
                    g = c * r - b
                    i -= 1
                if deflated:
                    continue
                d[l] -= p
                e[l] = g
                e[m] = 0.0
    return sweeps, -1
