import json
import os
import subprocess
import sys

import pytest

from sparse_ssk.cli import RunConfig, UsageError, main, parse_config, read_config_file

SMALL = ["--n", "120", "--phi", "0.35", "--seed", "5"]


def _run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().err


def test_valid_high_t_config():
    cfg = parse_config(["high-t", "--n", "2000", "--phi", "0.35", "--beta", "0.25", "--trials", "400", "--seed", "42"])
    assert isinstance(cfg, RunConfig)
    assert (cfg.subcommand, cfg.n, cfg.phi, cfg.beta, cfg.trials, cfg.seed) == ("high-t", 2000, 0.35, 0.25, 400, 42)


def test_phi_half_rejected(capsys):
    with pytest.raises(UsageError, match="open interval"):
        parse_config(["spectrum", "--phi", "0.5"])
    code, err = _run(["spectrum", "--phi", "0.5"], capsys)
    assert code == 2
    assert err.startswith("lab:error:usage:--phi")


def test_beta_margin_refused_before_sampling(tmp_path, capsys):
    out = tmp_path / "o"
    code, err = _run(["--beta", "0.5", "high-t", "--output-dir", str(out)], capsys)
    assert code == 2 and "lab:error:usage:" in err
    assert not out.exists()


def test_unknown_flag_and_bad_value(capsys):
    code, err = _run(["spectrum", "--bogus", "1"], capsys)
    assert code == 2 and "--bogus" in err
    code, err = _run(["spectrum", "--n", "ten"], capsys)
    assert code == 2 and "--n" in err
    code, err = _run(["spectrum", "--formats", "csv,png"], capsys)
    assert code == 2 and "--formats" in err


def test_config_file_precedence_and_errors(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("# comment\nsubcommand = spectrum\nn = 300\nphi = 0.3\nseed = 9\n")
    cfg = parse_config(["spectrum", "--config", str(f), "--seed", "11"])
    assert (cfg.n, cfg.phi, cfg.seed) == (300, 0.3, 11)
    assert parse_config(["spectrum"], config_file=str(f)).seed == 9
    with pytest.raises(UsageError, match="conflicting"):
        parse_config(["law", "--config", str(f)])
    f.write_text("colour = red\n")
    with pytest.raises(UsageError, match="unknown key"):
        read_config_file(f)
    f.write_text("n 300\n")
    with pytest.raises(UsageError):
        read_config_file(f)


def test_threads_fallback(monkeypatch):
    monkeypatch.setenv("LAB_THREADS", "4")
    assert parse_config(["spectrum"]).threads == 4
    assert parse_config(["spectrum", "--threads", "2"]).threads == 2


def test_unwritable_output_dir(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, err = _run(["law", "--output-dir", str(blocker / "sub")], capsys)
    assert code == 2 and err.startswith("lab:error:usage:--output-dir")


def _headers_ok(out, cfg_hash):
    for p in out.iterdir():
        first = p.read_text().splitlines()[0]
        if p.suffix == ".json":
            doc = json.loads(p.read_text())
            if p.name == "run_config.json":
                assert doc["config_hash"] == cfg_hash
            else:
                assert cfg_hash in doc["_header"]
        else:
            assert first.startswith("# ") and f"config_hash={cfg_hash}" in first, p.name


def test_law_subcommand(tmp_path, capsys):
    out = tmp_path / "law"
    assert main(["law", *SMALL, "--output-dir", str(out), "--formats", "csv,json"]) == 0
    summ = json.loads((out / "summary.json").read_text())
    assert summ["edge_plus"] == pytest.approx(2 + 120 ** -0.7, abs=0.01)
    assert 0.4 < summ["beta_c"] < 0.5
    lines = (out / "law.csv").read_text().splitlines()
    assert lines[1] == "x,rho,cdf"
    cfg_hash = json.loads((out / "run_config.json").read_text())["config_hash"]
    _headers_ok(out, cfg_hash)


def test_high_t_outputs_and_reproducibility(tmp_path):
    args = ["high-t", *SMALL, "--beta", "0.2", "--trials", "20", "--formats", "csv,json,plotdata"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main([*args, "--output-dir", str(a), "--threads", "1"]) == 0
    summ = json.loads((a / "summary.json").read_text())
    for key in ("sample_variance", "predicted_variance", "ks_p"):
        assert key in summ
    cfg_hash = summ["config_hash"]
    _headers_ok(a, cfg_hash)
    hist = [l for l in (a / "histogram.dat").read_text().splitlines() if not l.startswith("#")]
    pred = [l for l in (a / "predicted.dat").read_text().splitlines() if not l.startswith("#")]
    assert len(hist[0].split()) == 3 and len(pred[0].split()) == 2
    # rerun from the echoed run_config.json with a different thread count
    cfg = json.loads((a / "run_config.json").read_text())
    f = tmp_path / "again.cfg"
    f.write_text("".join(f"{k} = {','.join(v) if isinstance(v, list) else v}\n"
                         for k, v in cfg.items() if k not in ("config_hash", "threads", "output_dir", "s_param", "cache_dir")))
    assert main(["high-t", "--config", str(f), "--output-dir", str(b), "--threads", "4"]) == 0
    assert (a / "trials.csv").read_bytes() == (b / "trials.csv").read_bytes()


def test_spectrum_and_free_energy(tmp_path):
    out = tmp_path / "s"
    assert main(["spectrum", *SMALL, "--output-dir", str(out), "--formats", "csv,json,plotdata"]) == 0
    rows = [l for l in (out / "spectrum.csv").read_text().splitlines() if not l.startswith("#")]
    assert len(rows) == 120
    out2 = tmp_path / "f"
    assert main(["free-energy", *SMALL, "--beta", "0.2", "--contour", "--output-dir", str(out2), "--formats", "json"]) == 0
    d = json.loads((out2 / "summary.json").read_text())
    assert abs(d["f_saddle"] - d["f_contour"]) <= 10 / 120


def test_other_suites_smoke(tmp_path):
    for sub, extra in [("lss", ["--test-function", "square", "--trials", "20"]),
                       ("rigidity", ["--trials", "3"])]:
        out = tmp_path / sub
        assert main([sub, *SMALL, *extra, "--output-dir", str(out), "--formats", "csv,json"]) == 0
        assert (out / "summary.json").exists() and (out / "trials.csv").exists()


def test_console_script_entry_point(tmp_path):
    out = tmp_path / "cli"
    proc = subprocess.run([sys.executable, "-m", "sparse_ssk.cli", "law", "--s-param", "0.02", "--output-dir", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads((out / "summary.json").read_text())["edge_plus"] == pytest.approx(2.02, abs=0.01)
    proc = subprocess.run([sys.executable, "-m", "sparse_ssk.cli", "law", "--grid-size", "10"], capture_output=True, text=True)
    assert proc.returncode == 2 and proc.stderr.startswith("lab:error:usage:")
