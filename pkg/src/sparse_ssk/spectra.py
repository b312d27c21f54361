"""Dense symmetric eigenvalues and spectral observables.

Eigenvalues come from a Householder reduction to tridiagonal form (LAPACK
``dsytrd``) followed by the implicit-shift QL iteration in
``kernels.tridiagonal_ql``. Each result is validated against the trace
identities before it is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import kernels
from .ensemble import MatrixSample, z_from_entries
from .errors import EigenAccuracyError, NoConvergenceError

TRACE_RTOL = 1e-9


@dataclass(frozen=True)
class SpectrumSample:
    eigenvalues: np.ndarray = field(repr=False)  # descending
    z_statistic: float
    n: int
    phi: float
    trial_index: int = 0

    @property
    def lambda_1(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def gaps(self) -> np.ndarray:
        """lambda_1 - lambda_i, nonnegative and exact for nearby eigenvalues."""
        return self.eigenvalues[0] - self.eigenvalues


def spectrum_from_values(values, z_statistic=0.0, phi=0.0, trial_index=0) -> SpectrumSample:
    ev = np.sort(np.asarray(values, dtype=np.float64))[::-1].copy()
    ev.setflags(write=False)
    return SpectrumSample(ev, float(z_statistic), int(ev.size), float(phi), trial_index)


def tridiagonalize(a: np.ndarray):
    """Householder reduction; returns (diagonal, subdiagonal)."""
    n = a.shape[0]
    if n == 1:
        return a.diagonal().astype(np.float64).copy(), np.zeros(0)
    lwork, info = linalg.lapack.dsytrd_lwork(n, lower=1)
    _, d, e, _, info = linalg.lapack.dsytrd(a, lower=1, lwork=int(lwork))
    if info != 0:
        raise NoConvergenceError(f"dsytrd failed with info={info}")
    return d, e


def tridiagonal_eigenvalues(d, e, backend=None) -> np.ndarray:
    """Ascending eigenvalues of the tridiagonal matrix (d, e) by implicit QL."""
    n = len(d)
    impl = kernels if backend is None else kernels.get_backend(backend)
    dd = np.array(d, dtype=np.float64)
    ee = np.zeros(n)
    ee[: n - 1] = e
    sweeps, failed = impl.tridiagonal_ql(dd, ee, 30 * max(n, 1))
    if failed >= 0:
        resid = float(abs(ee[failed])) if failed < n else float("nan")
        raise NoConvergenceError(
            f"eigenvalue {failed} did not converge within {30 * n} sweeps "
            f"(off-diagonal residual {resid:.3e})"
        )
    return np.sort(dd)


def eigenvalues(m: MatrixSample | np.ndarray, method: str = "ql", check: bool = True) -> SpectrumSample:
    """All eigenvalues of a symmetric matrix, sorted descending.

    ``method='ql'`` uses the package kernel after Householder reduction;
    ``method='lapack'`` calls LAPACK's dsyev path (same algorithm family).
    """
    if isinstance(m, MatrixSample):
        a = m.entries
        phi = m.config.phi if m.config is not None else 0.0
        trial = m.trial_index
    else:
        a = np.asarray(m, dtype=np.float64)
        phi = 0.0
        trial = 0
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if method == "ql":
        d, e = tridiagonalize(a)
        ev = tridiagonal_eigenvalues(d, e)
    elif method == "lapack":
        ev = linalg.eigvalsh(a, driver="ev", check_finite=False)
    else:
        raise ValueError(f"unknown method {method!r}")
    ev = ev[::-1].copy()
    if check:
        check_trace_identities(a, ev)
    ev.setflags(write=False)
    return SpectrumSample(ev, z_from_entries(a), int(a.shape[0]), float(phi), trial)


def check_trace_identities(a: np.ndarray, ev: np.ndarray, rtol: float = TRACE_RTOL) -> None:
    fro2 = float(np.sum(a * a))
    sq = float(np.sum(ev * ev))
    if abs(sq - fro2) > rtol * max(fro2, np.finfo(float).tiny):
        raise EigenAccuracyError(
            f"sum of squared eigenvalues {sq!r} differs from Tr M^2 {fro2!r}"
        )
    tr = float(np.trace(a))
    scale = float(np.sum(np.abs(np.diag(a)))) + np.sqrt(fro2)
    if abs(float(np.sum(ev)) - tr) > rtol * max(scale, np.finfo(float).tiny):
        raise EigenAccuracyError(f"eigenvalue sum {np.sum(ev)!r} differs from trace {tr!r}")


def empirical_cdf(s: SpectrumSample, x) -> float | np.ndarray:
    """Fraction of eigenvalues <= x."""
    asc = s.eigenvalues[::-1]
    out = np.searchsorted(asc, x, side="right") / s.n
    return float(out) if np.ndim(out) == 0 else out
