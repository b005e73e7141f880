import csv
import json
import os
import subprocess
import sys

import pytest

from semispec.cli import ConfigError, config_hash, main, parse_config

HARMONIC = {"potential": {"builtin": "harmonic"}, "window": [0.05, 1.05], "domain": [-5, 5], "hbar": [0.1, 0.05]}


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(cfg if isinstance(cfg, str) else json.dumps(cfg))
    return str(p)


def run(tmp_path, sub, cfg, *extra, out="out"):
    out_dir = tmp_path / out
    code = main([sub, "--config", write(tmp_path, cfg), "--out", str(out_dir), *extra])
    return code, out_dir


def test_spectrum_report(tmp_path):
    code, out = run(tmp_path, "spectrum", HARMONIC, "--check")
    assert code == 0
    text = (out / "spectrum.csv").read_text()
    head = [ln for ln in text.splitlines() if ln.startswith("#")]
    digest = config_hash(HARMONIC)
    assert head[0].startswith("# semispec ") and head[2] == f"# config_hash {digest}"
    rows = list(csv.DictReader(ln for ln in text.splitlines() if not ln.startswith("#")))
    assert len(rows) >= 10 and all(r["config_hash"] == digest for r in rows)
    doc = json.loads((out / "spectrum.json").read_text())
    assert doc["config_hash"] == digest and doc["pass"] is True


def test_reports_are_byte_identical(tmp_path):
    run(tmp_path, "spectrum", HARMONIC, out="a")
    run(tmp_path, "spectrum", HARMONIC, "--jobs", "2", out="b")
    for name in ("spectrum.csv", "spectrum.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_hash_ignores_key_order():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


@pytest.mark.parametrize("cfg", [
    "{not json",
    {"potential": "x^", "window": [0, 1], "hbar": 0.1},
    {"potential": "x^2", "window": [1, 0], "hbar": 0.1},
    {"potential": "x^2", "window": [0, 1], "hbar": -0.1},
    {"potential": "x^2", "window": [0, 1], "hbar": 0.1, "bogus": 1},
    {"potential": {"builtin": "nope"}, "window": [0, 1], "hbar": 0.1},
])
def test_config_errors_exit_2_without_files(tmp_path, cfg):
    code, out = run(tmp_path, "spectrum", cfg)
    assert code == 2
    assert not out.exists() or os.listdir(out) == []


def test_missing_config_file(tmp_path):
    assert main(["weyl", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2


def test_tunnel_needs_lambda():
    with pytest.raises(ConfigError):
        parse_config(json.dumps({"potential": "x^2", "hbar": 0.1}), "tunnel")


def test_numerical_error_exit_3(tmp_path):
    cfg = dict(HARMONIC, domain=[-0.5, 0.5])
    code, out = run(tmp_path, "spectrum", cfg)
    assert code == 3
    assert not out.exists() or os.listdir(out) == []


def test_failed_check_exit_4(tmp_path):
    cfg = dict(HARMONIC, tolerances={"C_r": 1e-9})
    code, out = run(tmp_path, "spectrum", cfg, "--check")
    assert code == 4
    assert json.loads((out / "spectrum.json").read_text())["pass"] is False
    code, _ = run(tmp_path, "spectrum", cfg, out="nocheck")
    assert code == 0


@pytest.mark.parametrize("sub, cfg", [
    ("weyl", {"potential": {"builtin": "double_well"}, "window": [0.2, 0.8], "domain": "auto", "hbar": [0.1, 0.05]}),
    ("tunnel", {"potential": {"builtin": "double_well"}, "domain": [-2.5, 2.5], "hbar": [0.1, 0.05],
                "options": {"lambda": 0.25}}),
    ("splitting", {"potential": {"builtin": "double_well"}, "window": [0.2, 0.8], "domain": [-2, 2],
                   "hbar": [0.06, 0.05]}),
    ("phases", {"potential": {"builtin": "tilted_double_well", "c": 0.1}, "window": [0.3, 0.75],
                "domain": "auto", "hbar": [0.04]}),
])
def test_other_subcommands(tmp_path, sub, cfg):
    code, out = run(tmp_path, sub, cfg, "--check")
    assert code == 0
    doc = json.loads((out / f"{sub}.json").read_text())
    assert doc["rows"] and doc["pass"] is True


def test_console_script(tmp_path):
    cfg = write(tmp_path, HARMONIC)
    r = subprocess.run([sys.executable, "-m", "semispec.cli", "spectrum", "--config", cfg, "--out",
                        str(tmp_path / "o")], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
