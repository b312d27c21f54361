"""In-repo GOE Tracy-Widom reference generated by sampling.

A GOE matrix with off-diagonal variance 1/N and diagonal variance 2/N is
orthogonally similar to the tridiagonal matrix with diagonal N(0, 2)/sqrt(N)
and off-diagonal chi_{N-i}/sqrt(N), i = 1..N-1. Only the top eigenvalue of
that tridiagonal matrix is needed, so each draw costs O(N) memory. The dense
construction is kept as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import linalg

from ..ensemble import trial_rng
from ..errors import PreconditionError

TW_SEED = 20240601
MIN_SIZE = 500
MIN_TRIALS = 500


@dataclass(frozen=True)
class TWReference:
    sample: np.ndarray = field(repr=False)  # sorted ascending
    matrix_size: int
    m_trials: int
    method: str
    seed: int

    @property
    def mean(self) -> float:
        return float(np.mean(self.sample))

    @property
    def variance(self) -> float:
        return float(np.var(self.sample, ddof=1))

    @property
    def mean_se(self) -> float:
        return float(np.sqrt(self.variance / self.sample.size))

    def cdf(self, x):
        return np.searchsorted(self.sample, x, side="right") / self.sample.size


def _top_tridiagonal(rng, n):
    d = rng.standard_normal(n) * np.sqrt(2.0)
    e = np.sqrt(rng.chisquare(np.arange(n - 1, 0, -1, dtype=float)))
    top = linalg.eigvalsh_tridiagonal(d, e, select="i", select_range=(n - 1, n - 1))
    return float(top[0]) / np.sqrt(n)


def _top_dense(rng, n):
    x = rng.standard_normal((n, n))
    a = (x + x.T) / np.sqrt(2.0 * n)
    return float(linalg.eigvalsh(a, subset_by_index=[n - 1, n - 1])[0])


def _draw(m_trials, matrix_size, method, seed):
    top = _top_tridiagonal if method == "tridiagonal" else _top_dense
    out = np.empty(m_trials)
    for i in range(m_trials):
        out[i] = top(trial_rng(seed, i), matrix_size)
    return np.sort(matrix_size ** (2.0 / 3.0) * (out - 2.0))


@lru_cache(maxsize=16)
def _cached(m_trials, matrix_size, method, seed):
    s = _draw(m_trials, matrix_size, method, seed)
    s.setflags(write=False)
    return TWReference(s, matrix_size, m_trials, method, seed)


def tw1_reference_sample(
    m_trials: int = 2000, matrix_size: int = 2000, method: str = "tridiagonal", seed: int = TW_SEED
) -> TWReference:
    """Standardized N**(2/3) (lambda_1 - 2) over GOE draws, cached per argument set."""
    if matrix_size < MIN_SIZE:
        raise PreconditionError(f"matrix_size must be >= {MIN_SIZE}, got {matrix_size}")
    if m_trials < MIN_TRIALS:
        raise PreconditionError(f"m_trials must be >= {MIN_TRIALS}, got {m_trials}")
    if method not in ("tridiagonal", "dense"):
        raise ValueError("method must be 'tridiagonal' or 'dense'")
    return _cached(int(m_trials), int(matrix_size), method, int(seed))
