"""Command-line front end ``lab``.

Configuration sources, highest precedence first: command-line flags, a flat
``key = value`` config file given with ``--config``, built-in defaults.

Config file grammar: one ``key = value`` per line; blank lines and lines
starting with ``#`` are ignored; keys are the long flag names with dashes or
underscores (``n``, ``phi``, ``entry_law``, ``seed``, ``beta``, ``trials``,
``threads``, ``output_dir``, ``formats``, ...); ``formats`` is a comma list;
booleans are ``true``/``false``. Unknown keys are rejected.

Exit codes: 0 success, 1 experiment abort or numerical failure, 2 usage or
precondition error. Errors go to standard error as
``lab:error:<kind>:<message>`` on one line.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import __version__
from .ensemble import ENTRY_LAWS, EnsembleConfig, s_param, sample_matrix, scalar_statistics
from .errors import ExperimentAbort, InvalidConfigError, LabError, PreconditionError
from .experiments import report as report_mod
from .experiments import suites
from .experiments.runner import default_threads
from .experiments.tw import tw1_reference_sample
from .free_energy import find_saddle, free_energy_contour, limiting_free_energy
from .law import beta_c, build_law, measure_difference_report, semicircle_cdf, write_law_csv
from .spectra import eigenvalues, empirical_cdf

SUBCOMMANDS = ("spectrum", "free-energy", "law", "high-t", "low-t", "lss", "rigidity", "edge", "tw-oracle")
FORMATS = ("csv", "json", "plotdata")
HIST_BINS = 30


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    n: int = 1000
    phi: float = 0.35
    entry_law: str = "diluted_rademacher"
    seed: int = 0
    include_diagonal: bool = True
    beta: float = 0.25
    trials: int = 100
    threads: int | None = None
    output_dir: str = "lab_output"
    formats: list = field(default_factory=lambda: ["csv", "json"])
    trial: int = 0
    test_function: str = "log_shifted"
    a: float = 0.5
    s_param: float | None = None
    grid_size: int = 4096
    contour: bool = False
    tw_trials: int = 2000
    tw_size: int = 2000
    cache_dir: str | None = None

    def ensemble(self) -> EnsembleConfig:
        return EnsembleConfig(
            n=self.n, phi=self.phi, entry_law=self.entry_law, seed=self.seed, include_diagonal=self.include_diagonal
        )

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        d = self.to_dict()
        # execution details that do not change results stay out of the hash
        for key in ("threads", "output_dir", "formats", "cache_dir"):
            d.pop(key)
        return report_mod.config_hash(d)


_FIELD_TYPES = {
    "n": int,
    "phi": float,
    "entry_law": str,
    "seed": int,
    "include_diagonal": "bool",
    "beta": float,
    "trials": int,
    "threads": int,
    "output_dir": str,
    "formats": "list",
    "trial": int,
    "test_function": str,
    "a": float,
    "s_param": float,
    "grid_size": int,
    "contour": "bool",
    "tw_trials": int,
    "tw_size": int,
    "cache_dir": str,
}


def _convert(key, raw):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "bool":
            low = str(raw).strip().lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if kind == "list":
            items = [s.strip() for s in str(raw).split(",") if s.strip()]
            bad = [s for s in items if s not in FORMATS]
            if bad:
                raise UsageError(f"--formats: unknown format(s) {bad}; choose from {list(FORMATS)}")
            return items
        return kind(raw)
    except (TypeError, ValueError):
        raise UsageError(f"--{key.replace('_', '-')}: cannot parse {raw!r}") from None


def read_config_file(path) -> dict:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise UsageError(f"--config: line {lineno} is not 'key = value': {line!r}")
        key, value = (p.strip() for p in s.split("=", 1))
        key = key.replace("-", "_")
        if key == "subcommand":
            out[key] = value
            continue
        if key not in _FIELD_TYPES:
            raise UsageError(f"--config: unknown key {key!r} on line {lineno}")
        out[key] = _convert(key, value)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lab", description="Sparse spherical SK numerical laboratory.")
    p.add_argument("--version", action="version", version=f"lab {__version__}")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    S = argparse.SUPPRESS
    p.add_argument("--config", default=None, help="flat key = value config file")
    p.add_argument("--n", type=str, default=S, help="matrix dimension N")
    p.add_argument("--phi", type=str, default=S, help="sparsity exponent in (0, 1/2)")
    p.add_argument("--entry-law", dest="entry_law", type=str, default=S, choices=ENTRY_LAWS)
    p.add_argument("--seed", type=str, default=S)
    p.add_argument("--no-diagonal", dest="include_diagonal", action="store_const", const="false", default=S)
    p.add_argument("--beta", type=str, default=S, help="inverse temperature")
    p.add_argument("--trials", type=str, default=S, help="number of Monte Carlo trials")
    p.add_argument("--threads", type=str, default=S, help="trial pool size (fallback: LAB_THREADS)")
    p.add_argument("--output-dir", dest="output_dir", type=str, default=S)
    p.add_argument("--formats", type=str, default=S, help="comma list from csv,json,plotdata")
    p.add_argument("--trial", type=str, default=S, help="trial index for spectrum/free-energy")
    p.add_argument("--test-function", dest="test_function", type=str, default=S, choices=("square", "log_shifted"))
    p.add_argument("--a", type=str, default=S, help="shift for log_shifted: phi(x) = log(2 + a - x)")
    p.add_argument("--s-param", dest="s_param", type=str, default=S, help="law: override N Sigma^2")
    p.add_argument("--grid-size", dest="grid_size", type=str, default=S)
    p.add_argument("--contour", dest="contour", action="store_const", const="true", default=S)
    p.add_argument("--tw-trials", dest="tw_trials", type=str, default=S)
    p.add_argument("--tw-size", dest="tw_size", type=str, default=S)
    p.add_argument("--cache-dir", dest="cache_dir", type=str, default=S, help="spectrum cache directory")
    return p


def parse_config(argv, config_file=None) -> RunConfig:
    """Resolve flags > config file > defaults into a validated RunConfig."""
    parser = build_parser()

    def _error(message):
        raise UsageError(message)

    parser.error = _error
    ns = vars(parser.parse_args(argv))
    sub = ns.pop("subcommand")
    path = ns.pop("config", None) or config_file
    values = {}
    if path is not None:
        file_values = read_config_file(path)
        file_sub = file_values.pop("subcommand", None)
        if file_sub is not None and file_sub != sub:
            raise UsageError(f"conflicting subcommands: {sub!r} on the command line, {file_sub!r} in --config")
        values.update(file_values)
    for key, raw in ns.items():
        values[key] = _convert(key, raw)
    cfg = RunConfig(subcommand=sub, **values)
    if cfg.threads is None:
        try:
            cfg.threads = default_threads()
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    """Module preconditions checked before any sampling."""
    if cfg.threads < 1:
        raise UsageError("--threads: must be >= 1")
    if not cfg.formats:
        raise UsageError("--formats: at least one format is required")
    if cfg.subcommand not in ("law", "tw-oracle") or cfg.s_param is None:
        try:
            ens = cfg.ensemble()
        except InvalidConfigError as exc:
            flag = "--phi" if "phi" in str(exc) else "--n" if "n must" in str(exc) else "--seed"
            raise UsageError(f"{flag}: {exc}") from None
    if cfg.trials < 1:
        raise UsageError("--trials: must be >= 1")
    if cfg.trial < 0:
        raise UsageError("--trial: must be >= 0")
    if not cfg.beta > 0:
        raise UsageError("--beta: must be positive")
    try:
        if cfg.subcommand == "high-t":
            suites.check_high_t(ens, cfg.beta, cfg.trials)
        elif cfg.subcommand == "low-t":
            suites.check_low_t(ens, cfg.beta, cfg.trials)
        elif cfg.subcommand in ("lss", "edge"):
            if cfg.trials < 2:
                raise PreconditionError("n_trials must be >= 2")
            if cfg.subcommand == "lss":
                suites.lss_function(cfg.test_function, cfg.a)
        elif cfg.subcommand == "tw-oracle":
            if cfg.tw_size < 500 or cfg.tw_trials < 500:
                raise PreconditionError("--tw-size and --tw-trials must be >= 500")
        elif cfg.subcommand == "law":
            if cfg.grid_size < 256:
                raise PreconditionError("--grid-size must be >= 256")
            if cfg.s_param is not None and cfg.s_param < 0:
                raise PreconditionError("--s-param must be nonnegative")
    except PreconditionError as exc:
        raise UsageError(f"--beta/--trials precondition: {exc}" if cfg.subcommand in ("high-t", "low-t") else str(exc)) from None


def _prepare_output(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=out)
        os.close(fd)
        os.remove(tmp)
    except OSError as exc:
        raise UsageError(f"--output-dir: {out} is not writable ({exc})") from None
    return out


def _header(cfg: RunConfig) -> str:
    return f"# lab schema_version={report_mod.SCHEMA_VERSION} config_hash={cfg.config_hash()} subcommand={cfg.subcommand}"


def _write_json(path: Path, cfg: RunConfig, payload: dict) -> None:
    doc = {"_header": _header(cfg)[2:], "schema_version": report_mod.SCHEMA_VERSION, "config_hash": cfg.config_hash()}
    doc.update(report_mod._clean(payload))
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _write_table(path: Path, cfg: RunConfig, columns, rows) -> None:
    lines = [_header(cfg), "# " + " ".join(columns)]
    for row in rows:
        lines.append(" ".join(repr(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_plotdata(out: Path, cfg: RunConfig, x, predicted_density=None, predicted_sample=None) -> None:
    """Histogram (bin_left bin_right density) and predicted curve (x density)."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return
    counts, edges = np.histogram(x, bins=HIST_BINS, density=True)
    _write_table(out / "histogram.dat", cfg, ("bin_left", "bin_right", "density"), zip(edges[:-1], edges[1:], counts))
    centers = 0.5 * (edges[:-1] + edges[1:])
    if predicted_density is not None:
        grid = np.linspace(edges[0], edges[-1], 200)
        _write_table(out / "predicted.dat", cfg, ("x", "density"), zip(grid, predicted_density(grid)))
    elif predicted_sample is not None:
        dens, _ = np.histogram(predicted_sample, bins=edges, density=True)
        _write_table(out / "predicted.dat", cfg, ("x", "density"), zip(centers, dens))


def _emit_report(out: Path, cfg: RunConfig, rep, predicted_density=None, predicted_sample=None) -> None:
    if "json" in cfg.formats:
        d = rep.to_dict()
        d["ks_p"] = rep.p_value
        d.pop("schema_version", None)
        d.pop("config_hash", None)
        _write_json(out / "summary.json", cfg, d)
    if "csv" in cfg.formats:
        text = rep.csv_text().split("\n", 1)[1]
        (out / "trials.csv").write_text(_header(cfg) + "\n" + text)
    if "plotdata" in cfg.formats:
        x = [r.standardized_fluctuation for r in rep.records]
        _write_plotdata(out, cfg, x, predicted_density, predicted_sample)


def _gauss(var, mean=0.0):
    sd = math.sqrt(var)
    return lambda g: stats.norm.pdf(g, loc=mean, scale=sd)


def dispatch(cfg: RunConfig) -> int:
    out = _prepare_output(cfg)
    (out / "run_config.json").write_text(
        json.dumps({**cfg.to_dict(), "config_hash": cfg.config_hash()}, indent=2, sort_keys=True) + "\n"
    )
    cache = cfg.cache_dir if cfg.cache_dir else None
    sub = cfg.subcommand
    if sub == "law":
        s = cfg.s_param if cfg.s_param is not None else s_param(cfg.ensemble())
        law = build_law(s, cfg.grid_size)
        if "csv" in cfg.formats or "plotdata" in cfg.formats:
            write_law_csv(law, out / "law.csv", _header(cfg))
        mdr = measure_difference_report(law)
        summary = {
            "s_param": law.s_param,
            "edge_plus": law.edge_plus,
            "edge_minus": law.edge_minus,
            "beta_c": beta_c(law),
            "s_nu": law.s_nu,
            "s_nu_fit": law.s_nu_fit,
            "normalization": law.normalization(),
            "measure_difference_ratio": mdr.ratio,
            "max_stieltjes_difference": mdr.max_stieltjes_diff,
        }
        if "json" in cfg.formats:
            _write_json(out / "summary.json", cfg, summary)
        return 0
    if sub == "tw-oracle":
        tw = tw1_reference_sample(cfg.tw_trials, cfg.tw_size, seed=cfg.seed)
        if "csv" in cfg.formats:
            _write_table(out / "tw_sample.csv", cfg, ("tw",), ((v,) for v in tw.sample))
        if "json" in cfg.formats:
            _write_json(out / "summary.json", cfg, {"mean": tw.mean, "variance": tw.variance, "mean_se": tw.mean_se, "m_trials": tw.m_trials, "matrix_size": tw.matrix_size})
        if "plotdata" in cfg.formats:
            _write_plotdata(out, cfg, tw.sample)
        return 0

    ens = cfg.ensemble()
    if sub == "spectrum":
        m = sample_matrix(ens, cfg.trial)
        sp = eigenvalues(m)
        st = scalar_statistics(ens, m)
        if "csv" in cfg.formats:
            _write_table(out / "spectrum.csv", cfg, ("k", "lambda"), ((k + 1, v) for k, v in enumerate(sp.eigenvalues)))
        law = build_law(s_param(ens))
        if "json" in cfg.formats:
            pts = [-1.0, 0.0, 1.0]
            _write_json(out / "summary.json", cfg, {
                "lambda_1": sp.lambda_1,
                "z_statistic": st.z_statistic,
                "sigma": st.sigma,
                "sigma_limit": st.sigma_limit,
                "realized_nonzeros": m.realized_nonzeros,
                "edge_plus": law.edge_plus,
                "empirical_cdf": {str(x): empirical_cdf(sp, x) for x in pts},
                "semicircle_cdf": {str(x): float(semicircle_cdf(x)) for x in pts},
            })
        if "plotdata" in cfg.formats:
            _write_plotdata(out, cfg, sp.eigenvalues, predicted_density=law.density)
        return 0
    if sub == "free-energy":
        sp = eigenvalues(sample_matrix(ens, cfg.trial))
        law = build_law(s_param(ens))
        bc = beta_c(law)
        r = find_saddle(sp, cfg.beta, bc)
        if cfg.contour:
            r = r.with_contour(free_energy_contour(sp, cfg.beta, r))
        if "json" in cfg.formats:
            _write_json(out / "summary.json", cfg, {**asdict(r), "beta_c": bc, "f0": limiting_free_energy(cfg.beta)})
        return 0

    threads = cfg.threads
    if sub == "high-t":
        rep = suites.run_high_t(ens, cfg.beta, cfg.trials, threads, cache)
        _emit_report(out, cfg, rep, predicted_density=_gauss(rep.predicted_variance))
    elif sub == "low-t":
        rep = suites.run_low_t(ens, cfg.beta, cfg.trials, threads, cache)
        m = rep.metrics
        tw = tw1_reference_sample()
        mix = suites._mixture_sample(tw, m["tw_weight"], m["gauss_sd"])
        _emit_report(out, cfg, rep, predicted_sample=mix - np.mean(mix) + rep.sample_mean)
    elif sub == "lss":
        a = cfg.a if cfg.test_function == "log_shifted" else None
        rep = suites.run_lss(ens, cfg.test_function, cfg.trials, a, threads, cache)
        _emit_report(out, cfg, rep, predicted_density=_gauss(rep.predicted_variance))
    elif sub == "rigidity":
        rep = suites.run_rigidity(ens, cfg.trials, threads, cache)
        _emit_report(out, cfg, rep)
    elif sub == "edge":
        rep = suites.run_edge(ens, cfg.trials, threads, cache)
        if rep.metrics["regime"] == "tracy_widom":
            _emit_report(out, cfg, rep, predicted_sample=tw1_reference_sample().sample)
        else:
            _emit_report(out, cfg, rep, predicted_density=_gauss(rep.predicted_variance, rep.sample_mean))
    return 0


def _fail(kind: str, message: str, code: int) -> int:
    one_line = " ".join(str(message).split())
    print(f"lab:error:{kind}:{one_line}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        return _fail("usage", exc, 2)
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    try:
        return dispatch(cfg)
    except UsageError as exc:
        return _fail("usage", exc, 2)
    except PreconditionError as exc:
        return _fail("precondition", exc, 2)
    except ExperimentAbort as exc:
        return _fail("abort", exc, 1)
    except LabError as exc:
        return _fail(type(exc).__name__, exc, 1)


if __name__ == "__main__":
    sys.exit(main())
