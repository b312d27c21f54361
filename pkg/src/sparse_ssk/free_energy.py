"""Free energy of the spherical SK model with a sparse coupling matrix.

With G(z) = 2 beta z - (1/N) sum_i log(z - lambda_i) the partition function is

    Z_N = C_N * integral of exp((N/2) G(z)) dz,
    C_N = Gamma(N/2) / (2 pi i (N beta)**(N/2 - 1)),

along any vertical line to the right of lambda_1. The saddle gamma solves
G'(gamma) = 0. All sums are evaluated in gap coordinates z = lambda_1 + u so
that u ~ 1/N (the low-temperature case) keeps full relative precision.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import kernels
from .errors import BracketError, DomainError, NearCriticalError, QuadratureError
from .law import DeterministicLaw, beta_c as law_beta_c, solve_stieltjes
from .spectra import SpectrumSample

NEAR_CRITICAL = 1e-6
SADDLE_TOL = 1e-12


def _gaps(s: SpectrumSample) -> np.ndarray:
    return np.ascontiguousarray(s.gaps, dtype=np.float64)


def _check_beta(beta):
    if not (beta > 0 and math.isfinite(beta)):
        raise DomainError(f"beta must be positive and finite, got {beta}")


# ---------------------------------------------------------------------------
# G and its derivatives


def g_eval(s: SpectrumSample, beta: float, z: float) -> float:
    """G(z) = 2 beta z - (1/N) sum log(z - lambda_i), compensated summation."""
    _check_beta(beta)
    u = float(z) - s.lambda_1
    if not u > 1e-14:
        raise DomainError(f"G needs z > lambda_1 (z - lambda_1 = {u:.3e})")
    return 2.0 * beta * float(z) - kernels.gap_log_sum(u, _gaps(s)) / s.n


def g_derivative(s: SpectrumSample, beta: float, z: float, order: int) -> float:
    """G^(l)(z): 2 beta - (1/N) sum 1/(z - lambda_i) for l = 1, and
    ((-1)**l (l-1)!/N) sum (z - lambda_i)**-l for l >= 2."""
    if order < 1:
        raise ValueError("order must be >= 1")
    _check_beta(beta)
    u = float(z) - s.lambda_1
    if not u > 1e-14:
        raise DomainError(f"G needs z > lambda_1 (z - lambda_1 = {u:.3e})")
    return _g_der_u(u, _gaps(s), s.n, beta, order)


def _g_der_u(u, gaps, n, beta, order):
    ssum = kernels.gap_inv_power_sum(u, gaps, order)
    val = (-1) ** order * math.factorial(order - 1) * ssum / n
    if order == 1:
        val += 2.0 * beta
    return val


# ---------------------------------------------------------------------------
# saddle point


@dataclass(frozen=True)
class SaddleResult:
    gamma: float
    g_at_gamma: float
    g2_at_gamma: float
    f_saddle: float
    beta: float
    regime: str  # 'high', 'low', 'near_critical' or 'unclassified'
    u: float  # gamma - lambda_1, kept at full precision
    residual: float  # |G'(gamma)|
    iterations: int
    f_contour: float | None = None

    def with_contour(self, value: float) -> "SaddleResult":
        return SaddleResult(**{**self.__dict__, "f_contour": float(value)})


def classify_regime(beta: float, beta_c_value: float) -> str:
    if abs(beta - beta_c_value) < NEAR_CRITICAL:
        return "near_critical"
    return "high" if beta < beta_c_value else "low"


def find_saddle(s: SpectrumSample, beta: float, beta_c_value: float | None = None) -> SaddleResult:
    """Solve G'(gamma) = 0 on (lambda_1, infinity) and apply the saddle formula.

    G' is increasing. The left end u = 1/(10 beta N) has G' <= 2 beta - 10 beta
    < 0; the right end grows geometrically from 1/(2 beta N) + 1/(2 beta)
    until G' > 0. A Newton iteration safeguarded by the bracket then drives
    |G'| below 1e-12.
    """
    _check_beta(beta)
    n = s.n
    gaps = _gaps(s)
    lo = 1.0 / (10.0 * beta * n)
    f_lo = _g_der_u(lo, gaps, n, beta, 1)
    if not f_lo < 0:
        raise BracketError(f"G'(lambda_1 + {lo:.3e}) = {f_lo:.3e} is not negative")
    b = 1.0 / (2.0 * beta)
    hi = 1.0 / (2.0 * beta * n) + b
    for _ in range(200):
        if _g_der_u(hi, gaps, n, beta, 1) > 0:
            break
        b *= 2.0
        hi = 1.0 / (2.0 * beta * n) + b
    else:
        raise BracketError("no positive G' found while growing the right bracket")

    u = math.sqrt(lo * hi)
    it = 0
    g1 = _g_der_u(u, gaps, n, beta, 1)
    for it in range(1, 201):
        if g1 < 0:
            lo = u
        else:
            hi = u
        g2 = _g_der_u(u, gaps, n, beta, 2)
        un = u - g1 / g2 if g2 > 0 else 0.5 * (lo + hi)
        if not (lo < un < hi):
            un = 0.5 * (lo + hi)
        u = un
        g1 = _g_der_u(u, gaps, n, beta, 1)
        if abs(g1) <= SADDLE_TOL or hi - lo <= 4 * np.finfo(float).eps * u:
            break
    if abs(g1) > SADDLE_TOL:
        # the bracket collapsed to machine resolution; accept if G' is at rounding level
        scale = 2.0 * beta
        if abs(g1) > 1e-9 * scale:
            raise BracketError(f"saddle iteration stalled with |G'| = {abs(g1):.3e}")

    gamma = s.lambda_1 + u
    g_val = 2.0 * beta * gamma - kernels.gap_log_sum(u, gaps) / n
    g2 = _g_der_u(u, gaps, n, beta, 2)
    f = 0.5 * (g_val - 1.0 - math.log(2.0 * beta)) + (math.log(2.0 * beta) - 0.5 * math.log(g2)) / n
    regime = "unclassified" if beta_c_value is None else classify_regime(beta, beta_c_value)
    return SaddleResult(
        gamma=gamma,
        g_at_gamma=g_val,
        g2_at_gamma=g2,
        f_saddle=f,
        beta=float(beta),
        regime=regime,
        u=u,
        residual=abs(g1),
        iterations=it,
    )


# ---------------------------------------------------------------------------
# direct contour quadrature


def log_c_n(n: int, beta: float) -> float:
    """log |C_N| = lgamma(N/2) - log(2 pi) - (N/2 - 1) log(N beta)."""
    return math.lgamma(n / 2.0) - math.log(2.0 * math.pi) - (n / 2.0 - 1.0) * math.log(n * beta)


def _exponent(t, c, dist, n, beta):
    """(N/2)(G(z) - G(gamma)) at z = gamma + i t - c t**2, as (real, imag)."""
    x = -c * t * t
    re, im = kernels.contour_log1p_sum(x, t, dist)
    return n * beta * x - 0.5 * re, n * beta * t - 0.5 * im


def contour_integrand(s: SpectrumSample, beta: float, saddle: SaddleResult, t: float, curvature: float = 0.0) -> complex:
    """exp((N/2)(G(z) - G(gamma))) dz/(i dt) on z = gamma + i t - c t**2."""
    dist = np.ascontiguousarray(_gaps(s) + saddle.u)
    er, ei = _exponent(float(t), curvature, dist, s.n, beta)
    return complex(math.exp(er) * complex(math.cos(ei), math.sin(ei)) * complex(1.0, 2.0 * curvature * t))


def free_energy_contour(
    s: SpectrumSample,
    beta: float,
    saddle: SaddleResult,
    curvature: float | None = None,
    rtol: float = 1e-11,
) -> float:
    """F_N by direct quadrature of the contour integral through the saddle.

    The path is z = gamma + i t - c t**2. For N >= 8 the vertical line
    (c = 0) is used; for tiny N the integrand decays only like t**(-N/2) on
    that line, so a parabola bent to the left (c = 1) is used instead. It
    never meets the cut (-inf, lambda_1] because Im z = t != 0. Conjugate
    symmetry reduces the integral to twice the real part over t > 0.
    """
    _check_beta(beta)
    n = s.n
    c = (0.0 if n >= 8 else 1.0) if curvature is None else float(curvature)
    dist = np.ascontiguousarray(_gaps(s) + saddle.u)

    def mag(t):
        return _exponent(t, c, dist, n, beta)[0]

    def f(t):
        er, ei = _exponent(t, c, dist, n, beta)
        return math.exp(er) * (math.cos(ei) - 2.0 * c * t * math.sin(ei))

    tau = 1.0 / math.sqrt(max(n * saddle.g2_at_gamma / 2.0, 1e-300))
    big_t = 10.0 * tau
    for _ in range(200):
        if mag(big_t) < math.log(1e-16):
            break
        big_t *= 1.5
    else:
        raise QuadratureError("integrand did not decay below 1e-16 on the contour")

    # panel edges on a geometric scale: resolves both the saddle width and
    # any slower tail coming from eigenvalues near lambda_1
    edges = [0.0]
    e = tau
    while e < big_t:
        edges.append(e)
        e *= 2.0
    edges.append(big_t)
    total = 0.0
    err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            try:
                val, ae = integrate.quad(f, a, b, epsabs=0.0, epsrel=rtol, limit=400)
            except integrate.IntegrationWarning as exc:
                raise QuadratureError(f"contour quadrature did not converge on [{a}, {b}]: {exc}") from exc
            total += val
            err += ae
    integral = 2.0 * total
    if not integral > 0:
        raise QuadratureError(f"contour integral is not positive ({integral})")
    if 2.0 * err > 1e-8 * integral:
        raise QuadratureError(f"contour quadrature error {2 * err:.3e} too large")
    log_z = log_c_n(n, beta) + 0.5 * n * saddle.g_at_gamma + math.log(integral)
    return log_z / n


# ---------------------------------------------------------------------------
# deterministic references


def limiting_free_energy(beta: float) -> float:
    """F_0(beta): beta**2 for beta <= 1/2, else 2 beta - (log(2 beta) + 3/2)/2."""
    _check_beta(beta)
    if beta <= 0.5:
        return beta * beta
    return 2.0 * beta - 0.5 * (math.log(2.0 * beta) + 1.5)


@dataclass(frozen=True)
class DeterministicCentering:
    beta: float
    f0: float
    f_beta: float
    hat_gamma: float | None
    regime: str
    beta_c: float
    s_param: float


def hat_gamma_closed_form(s_param: float, beta: float) -> float:
    """Root of m(g) = -2 beta from the quartic: 2 beta + 1/(2 beta) + 8 s beta**3."""
    return 2.0 * beta + 1.0 / (2.0 * beta) + 8.0 * s_param * beta**3


def solve_hat_gamma(law: DeterministicLaw, beta: float) -> float:
    """gamma_hat with int dnu/(gamma_hat - x) = 2 beta, by bracketed root finding.

    -m(g) = int dnu/(g - x) for g > C_+, so the monotone function
    2 beta + m(g) is evaluated through the real physical root of the quartic.
    """
    from scipy.optimize import brentq

    c = law.edge_plus
    a, b = c + 1e-12, 2.0 * beta + 1.0 / (2.0 * beta) + 1.0

    def h(g):
        return 2.0 * beta + solve_stieltjes(law.s_param, g).real

    ha, hb = h(a), h(b)
    if not (ha < 0 < hb):
        raise BracketError(f"gamma_hat not bracketed on ({a}, {b}): values {ha:.3e}, {hb:.3e}")
    return brentq(h, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def centering(law: DeterministicLaw, beta: float) -> DeterministicCentering:
    """Deterministic centering F(beta) for the given law."""
    _check_beta(beta)
    bc = law_beta_c(law)
    regime = classify_regime(beta, bc)
    if regime == "near_critical":
        raise NearCriticalError(f"beta={beta} is within {NEAR_CRITICAL} of beta_c={bc}")
    f0 = limiting_free_energy(beta)
    if regime == "high":
        g = solve_hat_gamma(law, beta)
        f = beta * g - 0.5 * (1.0 + math.log(2.0 * beta)) - 0.5 * law.log_integral(g)
        return DeterministicCentering(beta, f0, f, g, regime, bc, law.s_param)
    c = law.edge_plus
    f = beta * c - 0.5 * law.log_integral(c) - 0.5 - 0.5 * math.log(2.0 * beta)
    return DeterministicCentering(beta, f0, f, None, regime, bc, law.s_param)


@dataclass(frozen=True)
class FluctuationLaw:
    """Predicted law of the standardized fluctuation N**t (F_N - F(beta))."""

    type: str  # 'gaussian' or 'tw_plus_gaussian'
    scale_exponent: float
    sigma: float
    variance: float | None = None  # high regime
    tw_coeff: float | None = None  # (beta - 1/2) N**(-2/3)
    gauss_coeff: float | None = None  # (beta - 1/4) N**-(phi + 1/2)
    gauss_coeff_finite: float | None = None  # (beta - beta_c + 1/4) N**-(phi + 1/2)
    gauss_variance: float | None = None  # 2 sigma**2
    tw_coeff_finite: float | None = None  # (beta - beta_c) N**(-2/3)

    def standardized_components(self, n: int, finite: bool = True):
        """(tw weight, gaussian sd) of the standardized variable N**t (F_N - F)."""
        scale = float(n) ** self.scale_exponent
        if self.type == "gaussian":
            return 0.0, math.sqrt(self.variance)
        tw = (self.tw_coeff_finite if finite else self.tw_coeff) * scale
        g = (self.gauss_coeff_finite if finite else self.gauss_coeff) * scale
        return tw, abs(g) * math.sqrt(self.gauss_variance)


def predicted_fluctuation_law(law: DeterministicLaw, cfg, beta: float) -> FluctuationLaw:
    from .ensemble import sigma_closed_form

    _check_beta(beta)
    bc = law_beta_c(law)
    regime = classify_regime(beta, bc)
    if regime == "near_critical":
        raise NearCriticalError(f"beta={beta} is within {NEAR_CRITICAL} of beta_c={bc}")
    n, phi = cfg.n, cfg.phi
    sigma = float(n) ** (phi + 0.5) * sigma_closed_form(cfg)
    if regime == "high":
        return FluctuationLaw("gaussian", phi + 0.5, sigma, variance=2.0 * sigma**2 * beta**4)
    return FluctuationLaw(
        "tw_plus_gaussian",
        min(2.0 / 3.0, phi + 0.5),
        sigma,
        tw_coeff=(beta - 0.5) * n ** (-2.0 / 3.0),
        gauss_coeff=(beta - 0.25) * n ** -(phi + 0.5),
        gauss_coeff_finite=(beta - bc + 0.25) * n ** -(phi + 0.5),
        gauss_variance=2.0 * sigma**2,
        tw_coeff_finite=(beta - bc) * n ** (-2.0 / 3.0),
    )
