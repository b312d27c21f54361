"""Trial execution: spectra for many trials, a thread pool, a spectrum cache.

Every trial is a pure function of (config, trial_index), so results do not
depend on the number of threads or on completion order; the pool's ordered
``map`` hands results back sorted by trial index.

Setting LAB_CACHE_DIR stores each trial's spectrum as ``.npy`` under a
directory named by the ensemble config hash, so suites that share an
ensemble reuse the same eigenvalues. Cached and fresh spectra are
bit-identical because both come from the same deterministic computation.
"""

from __future__ import annotations

import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..ensemble import EnsembleConfig, sample_matrix
from ..errors import ExperimentAbort, LabError
from ..spectra import SpectrumSample, eigenvalues

FAILURE_FRACTION = 0.01
# errors that mark a single trial as failed; anything else is a bug and propagates
TRIAL_ERRORS = (LabError, ArithmeticError, ValueError)


def default_threads() -> int:
    env = os.environ.get("LAB_THREADS")
    if env:
        try:
            v = int(env)
        except ValueError:
            raise ValueError(f"LAB_THREADS must be a positive integer, got {env!r}") from None
        if v < 1:
            raise ValueError(f"LAB_THREADS must be a positive integer, got {env!r}")
        return v
    return 1


def default_cache_dir() -> Path | None:
    env = os.environ.get("LAB_CACHE_DIR")
    return Path(env) if env else None


def _cache_path(cache_dir: Path, cfg: EnsembleConfig, trial_index: int) -> Path:
    return cache_dir / cfg.config_hash() / f"{trial_index}.npy"


def compute_spectrum(cfg: EnsembleConfig, trial_index: int, cache_dir: Path | None = None) -> SpectrumSample:
    """Sample trial ``trial_index`` and return its validated spectrum."""
    if cache_dir is not None:
        path = _cache_path(cache_dir, cfg, trial_index)
        if path.exists():
            arr = np.load(path)
            ev = arr[:-1].copy()
            ev.setflags(write=False)
            return SpectrumSample(ev, float(arr[-1]), cfg.n, cfg.phi, trial_index)
    m = sample_matrix(cfg, trial_index)
    s = eigenvalues(m)
    if cache_dir is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        with os.fdopen(fd, "wb") as fh:
            np.save(fh, np.concatenate([s.eigenvalues, [s.z_statistic]]))
        os.replace(tmp, path)
    return s


@dataclass
class TrialOutcome:
    trial_index: int
    value: object = None
    error: str | None = None
    wall_time: float = 0.0


def run_trials(cfg: EnsembleConfig, n_trials: int, fn, threads: int | None = None, cache=None):
    """Apply ``fn(spectrum)`` to each trial's spectrum.

    Returns the list of TrialOutcome in trial order. Trials whose spectrum or
    ``fn`` raises one of TRIAL_ERRORS are recorded as failures. More than 1%
    failures raises ExperimentAbort.
    """
    threads = default_threads() if threads is None else int(threads)
    if threads < 1:
        raise ValueError("thread count must be >= 1")
    if cache is None:
        cache_dir = default_cache_dir()
    elif cache is False:
        cache_dir = None
    else:
        cache_dir = Path(cache)

    def one(t):
        start = time.perf_counter()
        try:
            s = compute_spectrum(cfg, t, cache_dir)
            value = fn(s)
        except TRIAL_ERRORS as exc:
            return TrialOutcome(t, None, f"{type(exc).__name__}: {exc}", time.perf_counter() - start)
        return TrialOutcome(t, value, None, time.perf_counter() - start)

    if threads == 1:
        outcomes = [one(t) for t in range(n_trials)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, range(n_trials)))
    failed = [o for o in outcomes if o.error is not None]
    if len(failed) > FAILURE_FRACTION * n_trials:
        first = failed[0]
        raise ExperimentAbort(
            f"{len(failed)} of {n_trials} trials failed (more than 1%); "
            f"first failure at trial {first.trial_index}: {first.error}"
        )
    return outcomes
