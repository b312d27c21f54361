"""Goodness-of-fit and moment summaries used by the experiment suites."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from ..errors import DegenerateSampleError, PreconditionError

MIN_SAMPLE = 20


def _check_sample(sample) -> np.ndarray:
    x = np.asarray(sample, dtype=float).ravel()
    if x.size < MIN_SAMPLE:
        raise PreconditionError(f"need at least {MIN_SAMPLE} values, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise PreconditionError("sample contains non-finite values")
    return x


def ks_test(sample, reference_cdf) -> tuple[float, float]:
    """Two-sided one-sample KS test with the asymptotic p-value.

    The reference is a callable CDF. A constant sample is still tested (its
    statistic is at least 1/2 against any continuous law) but is flagged as
    degenerate when the caller asks for moments.
    """
    x = _check_sample(sample)
    res = stats.kstest(x, reference_cdf, method="asymp")
    return float(res.statistic), float(res.pvalue)


def ks_two_sample(sample, reference_sample) -> tuple[float, float]:
    x = _check_sample(sample)
    y = _check_sample(reference_sample)
    res = stats.ks_2samp(x, y, method="asymp")
    return float(res.statistic), float(res.pvalue)


@dataclass
class MomentRow:
    order: int
    name: str
    value: float
    std_error: float
    predicted: float | None = None

    def to_dict(self):
        return asdict(self)


def _stats4_from_sums(n, s1, s2, s3, s4, shift):
    """Moments from power sums of (x - shift); works elementwise on arrays."""
    m = s1 / n
    c2 = s2 / n - m * m
    c3 = s3 / n - 3 * m * s2 / n + 2 * m**3
    c4 = s4 / n - 4 * m * s3 / n + 6 * m * m * s2 / n - 3 * m**4
    return np.stack([m + shift, c2 * n / (n - 1), c3 / c2**1.5, c4 / c2**2 - 3.0], axis=-1)


def moment_table(sample, predicted=None) -> list[MomentRow]:
    """Mean, variance, skewness and excess kurtosis with jackknife SEs.

    ``predicted`` is an optional sequence of four reference values.
    """
    x = _check_sample(sample)
    if np.all(x == x[0]):
        raise DegenerateSampleError("all sample values are equal")
    n = x.size
    shift = float(np.mean(x))
    y = x - shift
    p = [y**k for k in range(1, 5)]
    sums = [math.fsum(v.tolist()) for v in p]
    full = _stats4_from_sums(n, *sums, shift)
    # leave-one-out statistics from the power sums minus each element's term
    leave = _stats4_from_sums(n - 1, *(s - v for s, v in zip(sums, p)), shift)
    mbar = leave.mean(axis=0)
    se = np.sqrt((n - 1) / n * np.sum((leave - mbar) ** 2, axis=0))
    names = ("mean", "variance", "skewness", "excess_kurtosis")
    pred = list(predicted) if predicted is not None else [None] * 4
    return [
        MomentRow(k + 1, names[k], float(full[k]), float(se[k]), None if pred[k] is None else float(pred[k]))
        for k in range(4)
    ]


def gaussian_cdf(mean: float, variance: float):
    sd = float(np.sqrt(variance))
    return lambda x: stats.norm.cdf(x, loc=mean, scale=sd)


def sample_variance(x) -> float:
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise PreconditionError("variance needs at least 2 values")
    return float(np.var(x, ddof=1))


def variance_standard_error(x) -> float:
    """Delta-method SE of the sample variance: sqrt((m4 - s^4) / n)."""
    x = np.asarray(x, dtype=float)
    c = x - x.mean()
    m4 = float(np.mean(c**4))
    s2 = float(np.mean(c**2))
    return float(np.sqrt(max(m4 - s2 * s2, 0.0) / x.size))
