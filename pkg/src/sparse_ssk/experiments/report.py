"""Per-trial records and experiment reports with JSON and CSV round-trips.

CSV schema (version 1): a first line ``# schema_version=1 config_hash=<hex>``
followed by the header ``trial,z,lambda1,f_n,standardized`` and one row per
successful trial, floats written with ``repr`` so they re-parse exactly. The
``f_n`` column holds the free energy for the high-t and low-t suites and the
suite's primary observable otherwise (see each suite's docstring).

JSON schema (version 1): a single object with keys ``schema_version``,
``suite``, ``config``, ``config_hash``, ``n_trials`` and the summary fields
of ExperimentReport; ``records`` holds the per-trial rows including
``wall_time``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields

SCHEMA_VERSION = 1
CSV_COLUMNS = ("trial", "z", "lambda1", "f_n", "standardized")


@dataclass
class TrialRecord:
    trial_index: int
    z_statistic: float
    lambda_1: float
    f_n: float
    standardized_fluctuation: float
    wall_time: float = 0.0

    def is_finite(self) -> bool:
        return all(
            math.isfinite(v) for v in (self.z_statistic, self.lambda_1, self.f_n, self.standardized_fluctuation)
        )


def config_hash(config: dict) -> str:
    payload = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


def _clean(v):
    """NaN and infinities become None so that JSON stays standard."""
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


@dataclass
class ExperimentReport:
    suite: str
    config: dict
    n_trials: int
    records: list[TrialRecord] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)
    sample_mean: float | None = None
    sample_variance: float | None = None
    predicted_variance: float | None = None
    ks_statistic: float | None = None
    p_value: float | None = None
    moment_table: list[dict] = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    @property
    def config_hash(self) -> str:
        return config_hash(self.config)

    @property
    def n_failed(self) -> int:
        return len(self.failures)

    # -- JSON --------------------------------------------------------------------------

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["records"] = [asdict(r) for r in self.records]
        d["config_hash"] = self.config_hash
        return _clean(d)

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True, allow_nan=False)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        d = dict(d)
        version = d.pop("schema_version", None)
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {version!r}")
        d.pop("config_hash", None)
        d["records"] = [TrialRecord(**r) for r in d.get("records", [])]
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls.from_dict(json.loads(text))

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    # -- CSV ---------------------------------------------------------------------------

    def csv_text(self) -> str:
        lines = [f"# schema_version={SCHEMA_VERSION} config_hash={self.config_hash} suite={self.suite}"]
        lines.append(",".join(CSV_COLUMNS))
        for r in self.records:
            lines.append(
                f"{r.trial_index},{r.z_statistic!r},{r.lambda_1!r},{r.f_n!r},{r.standardized_fluctuation!r}"
            )
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.csv_text())


def read_csv_records(path) -> tuple[dict, list[TrialRecord]]:
    """Parse a per-trial CSV; returns (header fields, records without wall time)."""
    with open(path) as fh:
        first = fh.readline().strip()
        if not first.startswith("#"):
            raise ValueError("missing header comment")
        header = dict(item.split("=", 1) for item in first[1:].split())
        cols = fh.readline().strip().split(",")
        if tuple(cols) != CSV_COLUMNS:
            raise ValueError(f"unexpected columns {cols}")
        recs = []
        for line in fh:
            if not line.strip():
                continue
            t, z, l1, f, st = line.strip().split(",")
            recs.append(TrialRecord(int(t), float(z), float(l1), float(f), float(st)))
    return header, recs
