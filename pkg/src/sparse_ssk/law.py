"""The deterministic spectral law of sparse matrices.

Its Stieltjes transform m(z) solves the quartic

    1 + z m + m**2 + s m**4 = 0,     s = N * Sigma**2,

on the branch with Im m > 0 for Im z > 0 and m(z) ~ -1/z at infinity. The
law is supported on [-C, C] with square-root edges. Internally the density
is stored through the smooth even function H(theta) = rho(C cos theta) /
sin(theta), expanded in a cosine series; integrals against the law and its
tail function are then evaluated with spectral accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import fft

from .errors import (
    BranchAmbiguityError,
    CrossCheckError,
    DomainError,
    EdgeBracketError,
    NonFiniteIntegrandError,
    OffSupportError,
)

ROOT_RTOL = 1e-10

# For s >= 1/4 the critical points of the quartic include i*y*(4 s y^2 - 2)
# with y**2 = (1 + sqrt(1 + 12 s)) / (6 s), which lies in the open upper
# half-plane, so the physical branch stops being a Stieltjes transform.
S_MAX = 0.25
# below this the companion matrix of the quartic is ill-scaled; the physical
# root is then found by Newton from the semicircle root (a correction of size s)
S_TINY = 1e-8


# ---------------------------------------------------------------------------
# semicircle


def m_semicircle(z):
    """Semicircle Stieltjes transform (boundary value from above on [-2, 2])."""
    z = np.asarray(z, dtype=complex)
    # product of principal roots puts the cut exactly on [-2, 2]
    z = np.where(z.imag == 0, z.real + 0j, z)
    out = 0.5 * (-z + np.sqrt(z - 2.0) * np.sqrt(z + 2.0))
    return out[()] if out.ndim == 0 else out


def semicircle_density(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) < 2.0, np.sqrt(np.clip(4.0 - x * x, 0.0, None)) / (2.0 * np.pi), 0.0)


def semicircle_cdf(x):
    """P(X <= x) for the semicircle law."""
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    t = np.arccos(x / 2.0)
    return 1.0 - (t - np.sin(t) * np.cos(t)) / np.pi


def semicircle_locations(n: int, convention: str = "half") -> np.ndarray:
    """Descending semicircle quantiles gamma_sc,k, k = 1..n.

    Solves t - cos t sin t = pi * c_k with gamma = 2 cos t, where
    c_k = (k - 1/2)/n ('half') or k/n ('integer').
    """
    k = np.arange(1, n + 1, dtype=float)
    if convention == "half":
        c = (k - 0.5) / n
    elif convention == "integer":
        c = k / n
    else:
        raise ValueError(f"unknown convention {convention!r}")
    target = np.pi * c
    # initial guess: edge asymptotics t ~ (3 pi c / 2)**(1/3), blended with the bulk
    t = np.clip(np.cbrt(1.5 * target), 0.0, np.pi)
    t = np.where(c > 0.5, np.pi - np.clip(np.cbrt(1.5 * (np.pi - target)), 0.0, np.pi), t)
    lo = np.zeros_like(t)
    hi = np.full_like(t, np.pi)
    for _ in range(100):
        f = t - np.sin(t) * np.cos(t) - target
        lo = np.where(f < 0, t, lo)
        hi = np.where(f > 0, t, hi)
        df = 2.0 * np.sin(t) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(df > 0, f / df, np.inf)
        tn = t - step
        bad = ~((tn > lo) & (tn < hi))
        tn = np.where(bad, 0.5 * (lo + hi), tn)
        done = np.max(np.abs(tn - t)) < 1e-15
        t = tn
        if done:
            break
    return 2.0 * np.cos(t)


# ---------------------------------------------------------------------------
# quartic roots and the physical branch


def quartic_residual(s, z, m):
    return 1.0 + z * m + m * m + s * m**4


def _quartic_roots(z, s):
    """All four roots of s m^4 + m^2 + z m + 1 for each z (shape (..., 4))."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    comp = np.zeros(z.shape + (4, 4), dtype=complex)
    comp[..., 0, 1] = -1.0 / s
    comp[..., 0, 2] = -z / s
    comp[..., 0, 3] = -1.0 / s
    comp[..., 1, 0] = 1.0
    comp[..., 2, 1] = 1.0
    comp[..., 3, 2] = 1.0
    return np.linalg.eigvals(comp)


def _newton_polish(s, z, m, steps=4):
    for _ in range(steps):
        p = quartic_residual(s, z, m)
        dp = z + 2.0 * m + 4.0 * s * m**3
        ok = dp != 0
        m = np.where(ok, m - np.where(ok, p / np.where(ok, dp, 1.0), 0.0), m)
    return m


def _min_point(x, s):
    """Unique real critical point of P_x(m) = 1 + x m + m^2 + s m^4.

    P_x'(m) = x + 2m + 4 s m^3 is strictly increasing, so there is exactly one
    real root; P_x is convex and attains its minimum there.
    """
    x = np.asarray(x, dtype=float)
    if s == 0:
        return -0.5 * x
    if s < S_TINY:
        m = -0.5 * x
        for _ in range(3):
            m = m - (x + 2.0 * m + 4.0 * s * m**3) / (2.0 + 12.0 * s * m * m)
        return m
    # depressed cubic m^3 + p m + q = 0 with p = 1/(2s) > 0: hyperbolic form
    p = 1.0 / (2.0 * s)
    q = x / (4.0 * s)
    r = 2.0 * np.sqrt(p / 3.0)
    m = -r * np.sinh(np.arcsinh(1.5 * q / p * np.sqrt(3.0 / p)) / 3.0)
    for _ in range(3):
        f = x + 2.0 * m + 4.0 * s * m**3
        m = m - f / (2.0 + 12.0 * s * m * m)
    return m


def _min_value(x, s):
    m = _min_point(x, s)
    return 1.0 + x * m + m * m + s * m**4


def _real_outer_root(x, s):
    """Physical real root for real x > C_+: the root of P_x in (m*, 0)."""
    x = np.asarray(x, dtype=float)
    lo = _min_point(x, s)
    hi = np.zeros_like(x)
    # P_x is convex with P_x(lo) <= 0 < P_x(0): safeguarded Newton from the right
    m = np.where(np.abs(x) > 0, -1.0 / x, lo)
    m = np.clip(m, lo, hi)
    for _ in range(200):
        f = 1.0 + x * m + m * m + s * m**4
        lo = np.where(f < 0, m, lo)
        hi = np.where(f > 0, m, hi)
        df = x + 2.0 * m + 4.0 * s * m**3
        with np.errstate(divide="ignore", invalid="ignore"):
            mn = m - f / df
        bad = ~((mn > lo) & (mn < hi)) | ~np.isfinite(mn)
        mn = np.where(bad, 0.5 * (lo + hi), mn)
        conv = np.abs(mn - m) <= 1e-16 * np.maximum(1.0, np.abs(m))
        m = mn
        if np.all(conv | (f == 0)):
            break
    return m


def _select_upper(s, z, roots, check_ambiguity=True):
    """Pick the physical root for Im z >= 0 inside the support."""
    ref = np.atleast_1d(m_semicircle(z))
    cand = np.where(roots.imag > 0, roots, np.nan + 0j)
    dist = np.abs(cand - ref[..., None])
    dist = np.where(np.isnan(dist), np.inf, dist)
    idx = np.argmin(dist, axis=-1)
    chosen = np.take_along_axis(roots, idx[..., None], axis=-1)[..., 0]
    if check_ambiguity:
        sd = np.sort(dist, axis=-1)
        close = np.isfinite(sd[..., 1]) & (
            np.abs(np.take_along_axis(cand, np.argsort(dist, axis=-1)[..., 1:2], -1)[..., 0] - chosen)
            < 1e-12
        )
        if np.any(close):
            bad = np.atleast_1d(z)[close][0]
            raise BranchAmbiguityError(f"two candidate physical roots coincide at z={bad}")
    return chosen


@lru_cache(maxsize=256)
def _edge(s: float) -> float:
    if s == 0:
        return 2.0
    if s < S_TINY:
        return edge_closed_form(s)[0]
    return upper_edge_bisection(s)


def upper_edge_bisection(s: float, tol: float = 1e-13) -> float:
    """Upper edge by bisection on density positivity.

    For x > 0 the density at x is positive iff P_x has no real negative root,
    i.e. iff min_m P_x(m) > 0; the minimum is decreasing in x.
    """
    lo, hi = 2.0 - 0.5, 2.0 + 4.0 * s + 0.1
    if not (_min_value(lo, s) > 0 and _min_value(hi, s) <= 0):
        raise EdgeBracketError(f"no sign change of the density test in [{lo}, {hi}] for s={s}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _min_value(mid, s) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def edge_closed_form(s: float):
    """(C_+, m(C_+)) from the double-root condition P = P' = 0."""
    if s == 0:
        return 2.0, -1.0
    m2 = 2.0 / (1.0 + math.sqrt(1.0 + 12.0 * s))
    m = -math.sqrt(m2)
    return -2.0 * m - 4.0 * s * m**3, m


def boundary_values(s: float, x, edge: float | None = None) -> np.ndarray:
    """m(x + i0) for real x (inside or outside the support)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    c = _edge(s) if edge is None else edge
    out = np.empty(x.shape, dtype=complex)
    outside = np.abs(x) >= c
    if np.any(outside):
        xo = x[outside]
        mo = _real_outer_root(np.abs(xo), s) * np.sign(xo)
        out[outside] = mo
    inside = ~outside
    if np.any(inside):
        xi = x[inside]
        if s < S_TINY:
            m = _newton_polish(s, xi + 0j, np.atleast_1d(m_semicircle(xi)))
            out[inside] = np.where(m.imag < 0, m.conj(), m)
        else:
            roots = _quartic_roots(xi + 0j, s)
            m = _select_upper(s, xi + 0j, roots, check_ambiguity=False)
            m = _newton_polish(s, xi + 0j, m)
            out[inside] = np.where(m.imag < 0, m.conj(), m)
    return out


def solve_stieltjes(s_param: float, z) -> complex:
    """Physical-branch root m(z) of 1 + z m + m^2 + s m^4 = 0 (Im z >= 0)."""
    s = float(s_param)
    if s < 0:
        raise ValueError("s_param must be nonnegative")
    z = complex(z)
    if z.imag < 0:
        raise ValueError("solve_stieltjes expects Im z >= 0; use conjugate symmetry")
    if z.imag == 0:
        c = _edge(s)
        if abs(z.real) <= c:
            raise OffSupportError(f"z={z.real} lies on the support [{-c}, {c}]")
        return complex(boundary_values(s, [z.real], c)[0])
    if s < S_TINY:
        return complex(_newton_polish(s, z, complex(m_semicircle(z))))
    roots = _quartic_roots(z, s)
    m = _select_upper(s, np.array([z]), roots)
    m = _newton_polish(s, z, m)[0]
    return complex(m)


def stieltjes_many(s_param: float, z) -> np.ndarray:
    """Vectorised solve_stieltjes; real entries must lie off the support."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    s = float(s_param)
    out = np.empty(z.shape, dtype=complex)
    real = z.imag == 0
    if np.any(real):
        c = _edge(s)
        if np.any(np.abs(z.real[real]) <= c):
            raise OffSupportError("real z on the support")
        out[real] = boundary_values(s, z.real[real], c)
    if np.any(~real):
        zc = z[~real]
        if np.any(zc.imag < 0):
            raise ValueError("expects Im z >= 0")
        if s < S_TINY:
            out[~real] = _newton_polish(s, zc, np.atleast_1d(m_semicircle(zc)))
        else:
            m = _select_upper(s, zc, _quartic_roots(zc, s))
            out[~real] = _newton_polish(s, zc, m)
    return out


# ---------------------------------------------------------------------------
# the law itself


def _cos_series_eval(coef, theta):
    """sum_k coef[k] cos(k theta), evaluated in chunks."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    k = np.arange(coef.size)
    out = np.empty(theta.shape)
    flat = theta.ravel()
    res = out.ravel()
    for i in range(0, flat.size, 512):
        res[i : i + 512] = np.cos(np.outer(flat[i : i + 512], k)) @ coef
    return out


def _sin_series_eval(coef, theta):
    """sum_k coef[k] sin(k theta)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    k = np.arange(coef.size)
    out = np.empty(theta.shape)
    flat = theta.ravel()
    res = out.ravel()
    for i in range(0, flat.size, 512):
        res[i : i + 512] = np.sin(np.outer(flat[i : i + 512], k)) @ coef
    return out


def _trim(coef, rel=1e-16):
    big = np.nonzero(np.abs(coef) > rel * np.max(np.abs(coef)))[0]
    return coef[: big[-1] + 1].copy() if big.size else coef[:1].copy()


@dataclass(frozen=True)
class DeterministicLaw:
    s_param: float
    edge_plus: float
    edge_minus: float
    density_grid: np.ndarray = field(repr=False)  # (G, 2): x ascending, rho
    cdf_grid: np.ndarray = field(repr=False)  # P(X <= x) on the same x
    s_nu: float
    m_edge: float  # m(C_+), the double root of the quartic at the edge
    h_coef: np.ndarray = field(repr=False)  # cosine coefficients of H
    tail_coef: np.ndarray = field(repr=False)  # coefficients of C_+ * H sin^2
    s_nu_fit: float = float("nan")

    # -- density and distribution -------------------------------------------------

    def density(self, x):
        x = np.asarray(x, dtype=float)
        c = self.edge_plus
        u = np.clip(x / c, -1.0, 1.0)
        th = np.arccos(u)
        rho = _cos_series_eval(self.h_coef, th).reshape(np.shape(th)) * np.sin(th)
        return np.where(np.abs(x) < c, np.clip(rho, 0.0, None), 0.0)

    def tail_theta(self, theta):
        """nu([C_+ cos theta, C_+]) for theta in [0, pi]."""
        theta = np.asarray(theta, dtype=float)
        b = self.tail_coef
        k = np.arange(1, b.size)
        val = b[0] * theta + _sin_series_eval(np.concatenate([[0.0], b[1:] / k]), theta).reshape(
            np.shape(theta)
        )
        return val

    def tail(self, x):
        """CDF from above: nu([x, infinity))."""
        x = np.asarray(x, dtype=float)
        th = np.arccos(np.clip(x / self.edge_plus, -1.0, 1.0))
        return self.tail_theta(th)

    def cdf(self, x):
        return 1.0 - self.tail(x)

    def normalization(self) -> float:
        return float(self.tail_theta(np.pi))

    def stieltjes(self, z) -> complex:
        return solve_stieltjes(self.s_param, z)

    # -- integration ---------------------------------------------------------------

    def h_at_midpoints(self, m: int) -> np.ndarray:
        c = np.zeros(m)
        k = min(m, self.h_coef.size)
        c[:k] = self.h_coef[:k]
        c[1:] *= 0.5
        return fft.dct(c, type=3)

    def integrate(self, f, n_nodes: int = 16384) -> float:
        """int f dnu by the midpoint rule in theta (x = C_+ cos theta)."""
        th = (np.arange(n_nodes) + 0.5) * np.pi / n_nodes
        x = self.edge_plus * np.cos(th)
        fx = np.asarray(f(x), dtype=float)
        if not np.all(np.isfinite(fx)):
            raise NonFiniteIntegrandError("integrand is not finite at a quadrature node")
        w = self.h_at_midpoints(n_nodes) * np.sin(th) ** 2
        return float(self.edge_plus * np.pi / n_nodes * math.fsum((fx * w).tolist()))

    def log_integral(self, z: float, n_nodes: int = 16384) -> float:
        """int log(z - x) dnu(x) for real z >= C_+.

        At z = C_+ the logarithmic endpoint singularity is split off exactly:
        log(C_+ - C_+ cos t) = log(2 C_+) + 2 log sin(t/2), and the second term
        is integrated against the cosine series in closed form.
        """
        c = self.edge_plus
        if z < c:
            raise OffSupportError(f"log integral needs z >= C_+ = {c}, got {z}")
        if z > c:
            return self.integrate(lambda x: np.log(z - x), n_nodes)
        return float(math.log(2.0 * c) + 2.0 * _log_sin_half_moment(self.tail_coef))


def _log_sin_half_moment(b):
    """int_0^pi log(sin(t/2)) g(t) dt for g(t) = sum_k b_k cos(k t).

    Uses int_0^pi log sin(t/2) dt = -pi log 2 and, for k >= 1,
    int_0^pi log sin(t/2) cos(kt) dt = -pi / (2k).
    """
    k = np.arange(1, b.size)
    return -np.pi * math.log(2.0) * b[0] - np.pi / 2.0 * math.fsum((b[1:] / k).tolist())


def build_law(s_param: float, grid_size: int = 4096) -> DeterministicLaw:
    s = float(s_param)
    if s < 0:
        raise ValueError("s_param must be nonnegative")
    if grid_size < 256:
        raise ValueError("grid_size must be >= 256")
    if s >= S_MAX:
        raise DomainError(
            f"s_param={s} >= 1/4: the quartic then has a branch point in the upper "
            "half-plane and no longer defines a probability measure"
        )
    c = _edge(s)
    closed_c, _ = edge_closed_form(s)
    if abs(c - closed_c) > 1e-10 * max(1.0, c):
        raise CrossCheckError(f"edge bisection {c} disagrees with double-root value {closed_c}")
    m_edge = float(_min_point(c, s))

    k_nodes = grid_size
    th = (np.arange(k_nodes) + 0.5) * np.pi / k_nodes
    if s == 0:
        h = np.full(k_nodes, 1.0 / np.pi)
    else:
        m = boundary_values(s, c * np.cos(th), c)
        h = m.imag / (np.pi * np.sin(th))
    a = fft.dct(h, type=2) / k_nodes
    a[0] *= 0.5
    a = _trim(a)

    # C_+ * H(t) sin^2(t) as a cosine series
    b = np.zeros(a.size + 2)
    for k, ak in enumerate(a):
        b[k] += 0.5 * ak
        b[k + 2] -= 0.25 * ak
        b[abs(k - 2)] -= 0.25 * ak
    b *= c

    theta = np.linspace(0.0, np.pi, grid_size)
    h_grid = _cos_series_eval(a, theta)
    rho = np.clip(h_grid * np.sin(theta), 0.0, None)
    law_tail = b[0] * theta + _sin_series_eval(
        np.concatenate([[0.0], b[1:] / np.arange(1, b.size)]), theta
    )
    x = c * np.cos(theta)
    order = np.argsort(x)
    x = x[order]
    x[0], x[-1] = -c, c
    density_grid = np.column_stack([x, rho[order]])
    cdf_grid = 1.0 - law_tail[order]

    s_nu = float(h_grid[0] * math.sqrt(2.0 / c))
    # fit over the last decade of grid points below the edge
    gap = c - x
    near = (gap > 0) & (gap <= 10.0 * gap[-2])
    s_nu_fit = float(np.median(density_grid[near, 1] / np.sqrt(gap[near])))

    return DeterministicLaw(
        s_param=s,
        edge_plus=c,
        edge_minus=-c,
        density_grid=density_grid,
        cdf_grid=cdf_grid,
        s_nu=s_nu,
        m_edge=m_edge,
        h_coef=a,
        tail_coef=b,
        s_nu_fit=s_nu_fit,
    )


@lru_cache(maxsize=32)
def cached_law(s_param: float, grid_size: int = 4096) -> DeterministicLaw:
    return build_law(s_param, grid_size)


# ---------------------------------------------------------------------------
# classical locations


@dataclass(frozen=True)
class ClassicalLocations:
    gamma: np.ndarray = field(repr=False)
    gamma_sc: np.ndarray = field(repr=False)
    n: int


def law_quantiles_theta(law: DeterministicLaw, targets, tol: float = 1e-13) -> np.ndarray:
    """theta with tail_theta(theta) = target, vectorised safeguarded Newton."""
    targets = np.asarray(targets, dtype=float)
    grid = np.linspace(0.0, np.pi, 4097)
    tab = law.tail_theta(grid)
    tab = np.maximum.accumulate(tab)
    t = np.interp(targets, tab, grid)
    idx = np.clip(np.searchsorted(tab, targets), 1, grid.size - 1)
    lo = grid[idx - 1].copy()
    hi = grid[idx].copy()
    c = law.edge_plus
    for _ in range(60):
        f = law.tail_theta(t) - targets
        lo = np.where(f < 0, t, lo)
        hi = np.where(f > 0, t, hi)
        df = c * _cos_series_eval(law.h_coef, t) * np.sin(t) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            tn = t - f / df
        bad = ~((tn > lo) & (tn < hi)) | ~np.isfinite(tn)
        tn = np.where(bad, 0.5 * (lo + hi), tn)
        if np.max(np.abs(f)) <= tol:
            break
        t = tn
    return t


def classical_locations(law: DeterministicLaw, n: int) -> ClassicalLocations:
    """gamma_k and gamma_sc,k at quantile level (k - 1/2)/n, descending."""
    if n < 2:
        raise ValueError("n must be >= 2")
    targets = (np.arange(1, n + 1) - 0.5) / n
    th = law_quantiles_theta(law, targets)
    gamma = law.edge_plus * np.cos(th)
    assert np.all(np.diff(gamma) < 0), "quantile function must be strictly monotone"
    return ClassicalLocations(gamma=gamma, gamma_sc=semicircle_locations(n, "half"), n=n)


# ---------------------------------------------------------------------------
# critical inverse temperature


def beta_c(law: DeterministicLaw, check: bool = True) -> float:
    """beta_c = -m(C_+)/2, cross-checked against (1/2) int dnu/(C_+ - x).

    In the theta variable the quadrature integrand is C_+ H(t)(1 + cos t)/C_+,
    whose integral over [0, pi] is pi (a_0 + a_1/2) exactly.
    """
    edge_value = -0.5 * law.m_edge
    if check:
        a = law.h_coef
        a1 = a[1] if a.size > 1 else 0.0
        quad = 0.5 * np.pi * (a[0] + 0.5 * a1)
        if abs(edge_value - quad) > 1e-6:
            raise CrossCheckError(f"beta_c from edge root {edge_value} vs quadrature {quad}")
    return float(edge_value)


# ---------------------------------------------------------------------------
# Gauss-Chebyshev quadrature on [-2, 2]

WEIGHTS = ("arcsine", "semicircle", "cltkernel")


def _cheb_sum(f, weight, n):
    th = (np.arange(n) + 0.5) * np.pi / n
    x = 2.0 * np.cos(th)
    fx = np.asarray(f(x), dtype=float)
    if fx.shape != x.shape:
        fx = np.broadcast_to(fx, x.shape)
    if not np.all(np.isfinite(fx)):
        raise NonFiniteIntegrandError("integrand is not finite at a Chebyshev node")
    if weight == "arcsine":
        w = np.full(n, np.pi / n)
    elif weight == "semicircle":
        w = (2.0 / n) * np.sin(th) ** 2
    elif weight == "cltkernel":
        w = (np.pi / n) * (2.0 - x * x)
    else:
        raise ValueError(f"weight must be one of {WEIGHTS}")
    return math.fsum((fx * w).tolist())


def chebyshev_integral(f, weight: str = "semicircle", n_nodes: int = 2048, return_error: bool = False):
    """int_{-2}^{2} f(x) w(x) dx by Gauss-Chebyshev quadrature.

    Weights: 'arcsine' 1/sqrt(4-x^2), 'semicircle' sqrt(4-x^2)/(2 pi),
    'cltkernel' (2-x^2)/sqrt(4-x^2). With return_error the node-doubling
    difference is returned as an error estimate.
    """
    val = _cheb_sum(f, weight, n_nodes)
    if not return_error:
        return val
    fine = _cheb_sum(f, weight, 2 * n_nodes)
    return fine, abs(fine - val)


def log_semicircle_closed_form(a: float) -> float:
    """int log(2 - x + a) dnu_sc(x) for a >= 0."""
    r = math.sqrt(a * (a + 4.0))
    return 0.5 + a + a * a / 4.0 - (a + 2.0) * r / 4.0 + math.log1p((a + r) / 2.0)


# ---------------------------------------------------------------------------
# distance to the semicircle


@dataclass
class MeasureDifferenceReport:
    s_param: float
    max_stieltjes_diff: float
    max_density_diff_weighted: float
    ratio: float  # max_density_diff_weighted / s_param (nan when s_param == 0)
    z_grid: np.ndarray = field(repr=False)
    stieltjes_diff: np.ndarray = field(repr=False)
    x_grid: np.ndarray = field(repr=False)
    density_diff_weighted: np.ndarray = field(repr=False)


def measure_difference_report(law: DeterministicLaw, n_points: int = 801) -> MeasureDifferenceReport:
    xs = np.linspace(-4.0, 4.0, 161)
    etas = np.array([0.05, 0.2, 1.0])
    zc = (xs[None, :] + 1j * etas[:, None]).ravel()
    xr = np.concatenate([np.linspace(-5.0, -law.edge_plus - 0.1, 40), np.linspace(law.edge_plus + 0.1, 5.0, 40)])
    z = np.concatenate([zc, xr + 0j])
    diff = np.abs(stieltjes_many(law.s_param, z) - np.atleast_1d(m_semicircle(z)))

    x = np.cos((np.arange(n_points) + 0.5) * np.pi / n_points) * 2.0
    w = np.sqrt(4.0 - x * x)
    dd = np.abs(law.density(x) - semicircle_density(x)) * w
    mx = float(np.max(dd))
    ratio = mx / law.s_param if law.s_param > 0 else float("nan")
    return MeasureDifferenceReport(law.s_param, float(np.max(diff)), mx, ratio, z, diff, x, dd)


def write_law_csv(law: DeterministicLaw, path, header: str = "") -> None:
    with open(path, "w") as fh:
        if header:
            fh.write(header if header.endswith("\n") else header + "\n")
        fh.write("x,rho,cdf\n")
        for (x, r), c in zip(law.density_grid, law.cdf_grid):
            fh.write(f"{float(x)!r},{float(r)!r},{float(c)!r}\n")
