"""Sparse symmetric random matrices with sparsity q = N**phi.

Entries are diluted: M_ij = B_ij * W_ij with B_ij in {0, (Np)**-1/2} and
P(B_ij != 0) = p = q**2 / N. ``diluted_rademacher`` takes W_ij = +-1,
``diluted_gaussian`` takes W_ij ~ N(0, 1). Diagonal entries follow the same
law unless ``include_diagonal`` is off.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InsufficientTrialsError, InvalidConfigError, MemoryCapError

ENTRY_LAWS = ("diluted_rademacher", "diluted_gaussian")

# fourth moment of W_ij for each law
_W_FOURTH = {"diluted_rademacher": 1.0, "diluted_gaussian": 3.0}

MEMORY_CAP_BYTES = 2 * 1024**3


@dataclass(frozen=True)
class EnsembleConfig:
    n: int
    phi: float
    entry_law: str = "diluted_rademacher"
    seed: int = 0
    include_diagonal: bool = True

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise InvalidConfigError(f"n must be an integer, got {self.n!r}")
        if self.n < 2:
            raise InvalidConfigError(f"n must be >= 2, got {self.n}")
        if not (0.0 < self.phi < 0.5):
            raise InvalidConfigError(
                f"phi must lie in the open interval (0, 1/2), got {self.phi}"
            )
        if self.entry_law not in ENTRY_LAWS:
            raise InvalidConfigError(
                f"entry_law must be one of {ENTRY_LAWS}, got {self.entry_law!r}"
            )
        if not (0 <= int(self.seed) < 2**64):
            raise InvalidConfigError("seed must be a 64-bit unsigned integer")
        if not (0.0 < self.p < 1.0):
            raise InvalidConfigError(f"derived sparsity probability p={self.p} not in (0, 1)")

    @property
    def q(self) -> float:
        return float(self.n) ** self.phi

    @property
    def p(self) -> float:
        return float(self.n) ** (2.0 * self.phi - 1.0)

    @property
    def magnitude(self) -> float:
        """Nonzero magnitude (Np)**-1/2 of B_ij."""
        return (self.n * self.p) ** -0.5

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n"] = int(d["n"])
        d["seed"] = int(d["seed"])
        d["phi"] = float(d["phi"])
        return d

    def config_hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


@dataclass(frozen=True)
class MatrixSample:
    entries: np.ndarray = field(repr=False)
    realized_nonzeros: int
    config_hash: str
    trial_index: int = 0
    config: EnsembleConfig | None = None


@dataclass(frozen=True)
class ScalarStatistics:
    z_statistic: float
    sigma: float
    sigma_limit: float


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Generator for one trial.

    The sub-seed is ``SeedSequence(entropy=seed, spawn_key=(trial_index,))``,
    i.e. the trial_index-th child of the root sequence; the SeedSequence hash
    mixes both words, so streams are reproducible on any machine.
    """
    if trial_index < 0:
        raise ValueError("trial_index must be nonnegative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trial_index),))
    return np.random.Generator(np.random.PCG64(ss))


def _check_memory(n, cap):
    need = 8 * n * n
    if need > cap:
        raise MemoryCapError(
            f"dense {n}x{n} matrix needs {need} bytes, above the cap of {cap} bytes"
        )


def sample_matrix(
    cfg: EnsembleConfig, trial_index: int = 0, memory_cap: int | None = None
) -> MatrixSample:
    n = cfg.n
    _check_memory(n, MEMORY_CAP_BYTES if memory_cap is None else memory_cap)
    rng = trial_rng(cfg.seed, trial_index)
    # one uniform per (i, j); only the upper triangle is kept
    mask = rng.random((n, n)) < cfg.p
    mask = np.triu(mask, 0 if cfg.include_diagonal else 1)
    rows, cols = np.nonzero(mask)
    nnz = rows.size
    if cfg.entry_law == "diluted_rademacher":
        w = rng.integers(0, 2, size=nnz).astype(np.float64) * 2.0 - 1.0
    else:
        w = rng.standard_normal(nnz)
    entries = np.zeros((n, n))
    entries[rows, cols] = cfg.magnitude * w
    entries[cols, rows] = entries[rows, cols]
    return MatrixSample(
        entries=entries,
        realized_nonzeros=int(nnz),
        config_hash=cfg.config_hash(),
        trial_index=int(trial_index),
        config=cfg,
    )


def sigma_closed_form(cfg: EnsembleConfig) -> float:
    """Sigma = (N**-2 * sum_ij E[M_ij**4])**1/2 for the configured law."""
    n = cfg.n
    count = n * n if cfg.include_diagonal else n * (n - 1)
    fourth = _W_FOURTH[cfg.entry_law] * cfg.p * cfg.magnitude**4
    return float(np.sqrt(count * fourth) / n)


def s_param(cfg: EnsembleConfig) -> float:
    """The quartic coefficient N * Sigma**2 of the deterministic law."""
    return cfg.n * sigma_closed_form(cfg) ** 2


def z_from_entries(entries: np.ndarray) -> float:
    n = entries.shape[0]
    return float(np.sum(entries * entries) / n - 1.0)


def scalar_statistics(cfg: EnsembleConfig, m: MatrixSample | np.ndarray) -> ScalarStatistics:
    entries = m.entries if isinstance(m, MatrixSample) else np.asarray(m)
    sigma = sigma_closed_form(cfg)
    return ScalarStatistics(
        z_statistic=z_from_entries(entries),
        sigma=sigma,
        sigma_limit=cfg.n ** (cfg.phi + 0.5) * sigma,
    )


def z_variance_exact(cfg: EnsembleConfig) -> float:
    """Exact Var(Z) for the configured ensemble.

    Var(M_ij**2) = E M**4 - 1/N**2 and Z sums N diagonal plus 2*N(N-1)/2
    off-diagonal squares, so Var(Z) = (2 - 1/N) * (E M**4 - N**-2) with
    diagonal included.
    """
    n = cfg.n
    m4 = _W_FOURTH[cfg.entry_law] * cfg.p * cfg.magnitude**4
    var_sq = m4 - 1.0 / n**2
    diag = n if cfg.include_diagonal else 0
    return float((diag + 2 * n * (n - 1)) * var_sq / n**2)


@dataclass
class MomentRow:
    k: int
    empirical: float
    target: float
    ratio: float
    flagged: bool


@dataclass
class MomentAudit:
    config: dict
    trials: int
    rows: list[MomentRow]

    @property
    def any_flagged(self) -> bool:
        return any(r.flagged for r in self.rows)


def moment_audit(cfg: EnsembleConfig, trials: int, k_max: int = 6) -> MomentAudit:
    """Empirical E|M_ij|**k against the scale N**-(1 + (k-2)phi), even k only."""
    if trials < 100:
        raise InsufficientTrialsError(f"moment_audit needs at least 100 trials, got {trials}")
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    ks = list(range(2, k_max + 1, 2))
    sums = np.zeros(len(ks))
    count = 0
    for t in range(trials):
        m = sample_matrix(cfg, t)
        a = np.abs(m.entries[np.triu_indices(cfg.n, 0 if cfg.include_diagonal else 1)])
        for j, k in enumerate(ks):
            sums[j] += np.sum(a**k)
        count += a.size
    rows = []
    for j, k in enumerate(ks):
        emp = sums[j] / count
        target = float(cfg.n) ** -(1.0 + (k - 2) * cfg.phi)
        ratio = emp / target
        rows.append(MomentRow(k, float(emp), target, float(ratio), not (0.25 <= ratio <= 4.0)))
    return MomentAudit(cfg.to_dict(), trials, rows)
