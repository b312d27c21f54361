"""Pure-Python fallback for the compiled kernels in ``_kernels.pyx``.

Same signatures and semantics; sums use ``math.fsum`` (exactly rounded),
which is at least as accurate as the compensated loops of the extension.
"""

import math

import numpy as np


def gap_log_sum(u, gaps):
    return math.fsum(np.log(u + np.asarray(gaps)).tolist())


def gap_inv_power_sum(u, gaps, ell):
    w = 1.0 / (u + np.asarray(gaps))
    return math.fsum((w**ell).tolist())


def contour_log1p_sum(x, y, dist):
    a = np.asarray(dist)
    wr = x / a
    wi = y / a
    # log1p is accurate near w = 0; away from it |1 + w| via hypot avoids the
    # cancellation in wr * (2 + wr) when 1 + w is close to zero
    near = (np.abs(wr) < 0.5) & (np.abs(wi) < 0.5)
    with np.errstate(divide="ignore"):
        re = np.where(near, 0.5 * np.log1p(wr * (2.0 + wr) + wi * wi),
                      np.log(np.hypot(1.0 + wr, wi)))
    im = np.arctan2(wi, 1.0 + wr)
    return math.fsum(re.tolist()), math.fsum(im.tolist())


def tridiagonal_ql(d, e, max_sweeps):
    n = len(d)
    if n == 0:
        return 0, -1
    # python lists are much faster than numpy scalars in these loops
    dl = [float(v) for v in d]
    el = [float(v) for v in e]
    el[n - 1] = 0.0
    eps = 2.220446049250313e-16
    fabs = abs
    hypot = math.hypot
    sweeps = 0
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                if fabs(el[m]) <= eps * (fabs(dl[m]) + fabs(dl[m + 1])):
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                d[:] = dl
                e[:] = el
                return sweeps, l
            g = (dl[l + 1] - dl[l]) / (2.0 * el[l])
            r = hypot(g, 1.0)
            g = dl[m] - dl[l] + el[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            deflated = False
            i = m - 1
            while i >= l:
                f = s * el[i]
                b = c * el[i]
                r = hypot(f, g)
                el[i + 1] = r
                if r == 0.0:
                    dl[i + 1] -= p
                    el[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = dl[i + 1] - p
                r = (dl[i] - g) * s + 2.0 * c * b
                p = s * r
                dl[i + 1] = g + p
                g = c * r - b
                i -= 1
            if deflated:
                continue
            dl[l] -= p
            el[l] = g
            el[m] = 0.0
    d[:] = dl
    e[:] = el
    return sweeps, -1
