"""Command-line front end: ``semispec <subcommand> --config <path> [--check] [--out DIR] [--jobs K]``.

Each run writes ``<subcommand>.csv`` (with a ``#`` header block) and a sibling
``<subcommand>.json`` into the output directory.  Both files are built in
memory and moved into place only after every job has finished, so a failed
run leaves nothing behind.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .geometry import auto_domain, decomposition
from .oracle import Grid, TridiagonalOperator, eigenvalues_in_window, eigenvector, refined_spectrum
from .potential import PotentialError, PotentialModel, builtin, parse_potential
from .semiclassics import (C_F, C_R, PhaseError, action_span, check_fixing, double_well_analysis, edge_passes,
                           match_spectrum, phase_report, phase_space_measure, predict_spectrum,
                           splitting_fit, weyl_count)
from .tunneling import compute_rt, default_anchors

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 2, 3, 4
SUBCOMMANDS = ("spectrum", "phases", "weyl", "tunnel", "splitting")


class ConfigError(ValueError):
    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass(frozen=True)
class RunConfig:
    model: PotentialModel
    window: tuple | None
    domain: tuple
    hbars: tuple
    grid_n: int | None
    c_r: float
    c_f: float
    options: dict
    raw: dict

    @property
    def digest(self) -> str:
        return config_hash(self.raw)


def config_hash(raw: dict) -> str:
    text = json.dumps(raw, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(text.encode()).hexdigest()


def _number(value, path: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError("expected a finite number", path)
    if positive and value <= 0:
        raise ConfigError("must be positive", path)
    return float(value)


def _pair(value, path: str) -> tuple[float, float]:
    if not isinstance(value, list) or len(value) != 2:
        raise ConfigError("expected a list of two numbers", path)
    a, b = (_number(v, f"{path}[{i}]") for i, v in enumerate(value))
    if not a < b:
        raise ConfigError("first entry must be smaller than the second", path)
    return a, b


def _potential(spec) -> PotentialModel:
    try:
        if isinstance(spec, str):
            return parse_potential(spec)
        if isinstance(spec, dict):
            if "expr" in spec:
                return parse_potential(spec["expr"])
            if "builtin" in spec:
                c = spec.get("c")
                if c is not None:
                    c = _number(c, "potential.c")
                return builtin(str(spec["builtin"]), c)
    except PotentialError as exc:
        raise ConfigError(str(exc), "potential") from None
    raise ConfigError("expected an expression string or {'builtin': name} / {'expr': text}", "potential")


def parse_config(text: str, subcommand: str, source: str = "config") -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at offset {exc.pos} (line {exc.lineno}, column {exc.colno}): {exc.msg}",
                          source) from None
    if not isinstance(raw, dict):
        raise ConfigError("top level must be an object", source)
    known = {"potential", "window", "domain", "hbar", "grid", "tolerances", "options"}
    extra = sorted(set(raw) - known)
    if extra:
        raise ConfigError(f"unknown keys {extra}", source)
    if "potential" not in raw:
        raise ConfigError("missing", "potential")
    model = _potential(raw["potential"])
    hb = raw.get("hbar")
    if hb is None:
        raise ConfigError("missing", "hbar")
    hb = hb if isinstance(hb, list) else [hb]
    if not hb:
        raise ConfigError("empty list", "hbar")
    hbars = tuple(_number(h, f"hbar[{i}]", positive=True) for i, h in enumerate(hb))
    options = raw.get("options", {})
    if not isinstance(options, dict):
        raise ConfigError("expected an object", "options")
    window = _pair(raw["window"], "window") if "window" in raw else None
    if subcommand == "tunnel":
        lam = _number(options.get("lambda"), "options.lambda")
        if "anchors" in options:
            _pair(options["anchors"], "options.anchors")
        if window is None:
            window = (lam, lam + 1e-9)
    elif window is None:
        raise ConfigError("missing", "window")
    tol = raw.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ConfigError("expected an object", "tolerances")
    c_r = _number(tol.get("C_r", C_R), "tolerances.C_r", positive=True)
    c_f = _number(tol.get("C_f", C_F), "tolerances.C_f", positive=True)
    grid = raw.get("grid", "auto")
    grid_n = None
    if grid != "auto":
        if not isinstance(grid, dict) or not isinstance(grid.get("n"), int) or isinstance(grid.get("n"), bool):
            raise ConfigError("expected \"auto\" or {\"n\": integer}", "grid")
        grid_n = grid["n"]
        if grid_n < 63:
            raise ConfigError("n must be at least 63", "grid.n")
    dom = raw.get("domain", "auto")
    if dom == "auto":
        try:
            domain = auto_domain(model, window, max(hbars))
        except ValueError as exc:
            raise ConfigError(str(exc), "domain") from None
    else:
        domain = _pair(dom, "domain")
    return RunConfig(model, window, domain, hbars, grid_n, c_r, c_f, options, raw)


def _grid(cfg: RunConfig, hbar: float) -> Grid:
    if cfg.grid_n is not None:
        return Grid(cfg.domain[0], cfg.domain[1], cfg.grid_n)
    return Grid.auto(cfg.domain, hbar)


# ---------------------------------------------------------------- jobs (one per hbar)

def _job_spectrum(cfg: RunConfig, hbar: float):
    pred = predict_spectrum(cfg.model, hbar, cfg.window, cfg.domain, cfg.c_r, pad=True)
    num = refined_spectrum(cfg.model, _grid(cfg, hbar), hbar, cfg.window)
    report = match_spectrum(pred, [r.lam for r in num])
    counts = {(p.ell, p.n): c for p, c in report.interval_counts}
    rows = []
    for m in report.eigenvalues:
        lvl = m.level
        rows.append({"hbar": hbar, "ell": "" if lvl is None else lvl.ell, "n": "" if lvl is None else lvl.n,
                     "lam_pred": "" if lvl is None else lvl.lam, "lam_num": m.lam, "distance": m.distance,
                     "interval_count": "" if lvl is None else counts[(lvl.ell, lvl.n)]})
    lo, hi = cfg.window
    for p in report.empty:
        if not lo <= p.lam <= hi:
            continue
        rows.append({"hbar": hbar, "ell": p.ell, "n": p.n, "lam_pred": p.lam, "lam_num": "", "distance": "",
                     "interval_count": 0})
    ok = not report.unmatched and all(m.distance <= cfg.c_r * hbar * hbar for m in report.eigenvalues)
    return rows, {"hbar": hbar, "levels": len(pred.levels), "eigenvalues": len(report.eigenvalues),
                  "max_distance": report.max_distance, "pass": ok}


def _job_phases(cfg: RunConfig, hbar: float):
    grid = _grid(cfg, hbar)
    op = TridiagonalOperator.build(cfg.model, grid, hbar)
    rows, ok, skipped = [], True, 0
    for lam in eigenvalues_in_window(op, cfg.window):
        lam = float(lam)
        dec = decomposition(cfg.model, lam, cfg.domain)
        try:
            rep = phase_report(grid.x, eigenvector(op, lam).psi, cfg.model, lam, hbar, cfg.domain, dec)
        except PhaseError:
            skipped += 1
            rows.append({"hbar": hbar, "lam": lam, "ell": "", "side": "", "x_star": "", "amplitude": "",
                         "theta": "", "delta": "", "fixing": "", "edges_passed": "", "status": "unmeasurable"})
            continue
        fix = [check_fixing(rep[2 * k + 1], rep[2 * k + 2], hbar, cfg.c_f).passed for k in range(dec.L - 1)]
        passes = edge_passes(rep, hbar, cfg.c_f)
        good = all(fix) and passes >= dec.L + 1
        ok = ok and good
        for m in rep:
            barrier = m.ell - 1 if m.side == "left" else m.ell
            verdict = fix[barrier] if 0 <= barrier < len(fix) else ""
            rows.append({"hbar": hbar, "lam": lam, "ell": m.ell, "side": m.side, "x_star": m.x_star,
                         "amplitude": m.amplitude, "theta": "" if m.indeterminate else m.theta,
                         "delta": "" if m.indeterminate else m.delta, "fixing": verdict,
                         "edges_passed": passes, "status": "ok" if good else "fail"})
    return rows, {"hbar": hbar, "skipped": skipped, "pass": ok}


def _job_weyl(cfg: RunConfig, hbar: float):
    op = TridiagonalOperator.build(cfg.model, _grid(cfg, hbar), hbar)
    c = op.count_below(np.array(cfg.window))
    check = weyl_count(cfg.model, hbar, cfg.window, cfg.domain, int(c[1] - c[0]))
    row = {"hbar": hbar, "weyl": check.weyl, "lower": check.lower, "upper": check.upper, "count": check.count,
           "L": check.L, "pass": check.passed}
    return [row], {"hbar": hbar, "pass": check.passed}


def _job_tunnel(cfg: RunConfig, hbar: float):
    lam = float(cfg.options["lambda"])
    anchors = cfg.options.get("anchors") or default_anchors(cfg.model, lam, cfg.domain)
    r = compute_rt(cfg.model, lam, hbar, anchors)
    scaled = math.exp(r.log_abs_T + r.omega / hbar)
    row = {"hbar": hbar, "lam": lam, "omega": r.omega, "abs_R": abs(r.R), "log_abs_T": r.log_abs_T,
           "T_scaled": scaled, "flux_defect": r.flux_defect}
    ok = abs(abs(r.R) - 1) <= 5 * hbar and abs(r.flux_defect) <= 1e-6
    return [row], {"hbar": hbar, "omega": r.omega, "log_abs_T": r.log_abs_T, "pass": ok}


def _job_splitting(cfg: RunConfig, hbar: float):
    rep = double_well_analysis(cfg.model, hbar, cfg.window, cfg.domain)
    rows = [{"hbar": hbar, "pair": i, "lam_lower": p.lower, "lam_upper": p.upper,
             "lower_parity": "even" if p.lower_parity > 0 else "odd", "splitting": p.splitting,
             "omega": p.omega, "exponent": -hbar * math.log(p.splitting), "parity_error": p.parity_error}
            for i, p in enumerate(rep.pairs)]
    ok = all(p.parity_error <= 1e-8 and p.lower_parity > 0 for p in rep.pairs)
    return rows, {"hbar": hbar, "pairs": len(rep.pairs), "excluded": list(rep.excluded), "pass": ok,
                  "_report": rep}


JOBS = {"spectrum": _job_spectrum, "phases": _job_phases, "weyl": _job_weyl, "tunnel": _job_tunnel,
        "splitting": _job_splitting}


def _finish(subcommand: str, cfg: RunConfig, summaries: list) -> dict:
    extra: dict = {}
    if subcommand == "tunnel" and len(summaries) >= 2:
        inv = np.array([1 / s["hbar"] for s in summaries])
        y = np.array([s["log_abs_T"] for s in summaries])
        slope = float(np.polyfit(inv, y, 1)[0])
        omega = float(np.mean([s["omega"] for s in summaries]))
        extra = {"slope": slope, "omega": omega, "slope_pass": abs(slope / omega + 1) <= 0.05}
    if subcommand == "splitting":
        reports = [s.pop("_report") for s in summaries]
        if sum(1 for r in reports if r.pairs) >= 2:
            fit = splitting_fit(reports)
            extra = {"kappa": fit.kappa, "raw_slope": fit.raw_slope, "mean_omega": fit.mean_omega,
                     "fit_pass": abs(fit.kappa + 1) <= 0.1}
    if subcommand == "weyl" and cfg.options.get("monte_carlo"):
        area, err = phase_space_measure(cfg.model, cfg.window, cfg.domain,
                                        int(cfg.options.get("samples", 400_000)))
        span, _ = action_span(cfg.model, cfg.window, cfg.domain)
        extra = {"phase_space_half": 0.5 * area, "phase_space_error": 0.5 * err, "action_span": span,
                 "mc_pass": abs(0.5 * area - span) <= 0.01 * span}
    return extra


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _render(subcommand: str, cfg: RunConfig, rows: list, summaries: list, extra: dict, passed: bool):
    digest = cfg.digest
    buf = io.StringIO()
    buf.write(f"# semispec {__version__}\n# subcommand {subcommand}\n# config_hash {digest}\n")
    cols = ["config_hash"] + (list(rows[0]) if rows else [])
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([digest] + [_fmt(r[c]) for c in cols[1:]])
    doc = {"tool": "semispec", "version": __version__, "subcommand": subcommand, "config_hash": digest,
           "config": cfg.raw, "rows": [dict(config_hash=digest, **r) for r in rows], "summary": summaries,
           "fit": extra, "pass": passed}
    text = json.dumps(doc, sort_keys=True, indent=1, allow_nan=True, default=float) + "\n"
    return buf.getvalue(), text


def _write_atomic(out_dir: str, files: dict):
    os.makedirs(out_dir, exist_ok=True)
    tmp = []
    try:
        for name, content in files.items():
            fd, path = tempfile.mkstemp(prefix=f".{name}.", dir=out_dir)
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(content)
            tmp.append((path, os.path.join(out_dir, name)))
        for src, dst in tmp:
            os.replace(src, dst)
    finally:
        for src, _ in tmp:
            if os.path.exists(src):
                os.unlink(src)


def run(subcommand: str, cfg: RunConfig, jobs: int = 1):
    """Run every hbar job; return (rows, summaries, extra, passed)."""
    fn = JOBS[subcommand]
    if jobs > 1 and len(cfg.hbars) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(fn, [cfg] * len(cfg.hbars), cfg.hbars))
    else:
        results = [fn(cfg, h) for h in cfg.hbars]
    order = sorted(range(len(results)), key=lambda i: -cfg.hbars[i])
    rows = [r for i in order for r in results[i][0]]
    summaries = [results[i][1] for i in order]
    extra = _finish(subcommand, cfg, summaries)
    passed = all(s["pass"] for s in summaries) and all(v for k, v in extra.items() if k.endswith("_pass"))
    return rows, summaries, extra, passed


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="semispec", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True)
    parser.add_argument("--check", action="store_true", help="exit 4 if an acceptance check fails")
    parser.add_argument("--out", default=".")
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        cfg = parse_config(text, args.subcommand, args.config)
    except (OSError, ConfigError) as exc:
        print(f"semispec: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rows, summaries, extra, passed = run(args.subcommand, cfg, args.jobs)
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"semispec: numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    csv_text, json_text = _render(args.subcommand, cfg, rows, summaries, extra, passed)
    _write_atomic(args.out, {f"{args.subcommand}.csv": csv_text, f"{args.subcommand}.json": json_text})
    if args.check and not passed:
        print(f"semispec: {args.subcommand} check failed", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
