"""Command-line front end.

Exit codes: 0 on success, 2 for unreadable input or configuration, 3 when a
statistical precondition fails (for example too few blocks for the level).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import sim
from .baselines import bootstrap_ci, subsample_ci, wald_ci
from .errors import PreconditionError
from .ghulc import GhulcConfig, ghulc_ci, median_estimator
from .medci import Sample, median_ci_exact, median_ci_hoeffding
from .width import NonStdParams, limit_law_density, write_density_csv

EXIT_OK, EXIT_INPUT, EXIT_PRECONDITION = 0, 2, 3


class InputError(Exception):
    """Bad file contents, flags or configuration; maps to exit code 2."""


def _is_number(field: str) -> bool:
    try:
        float(field)
    except ValueError:
        return False
    return True


def read_table(path) -> np.ndarray:
    """Numeric CSV as a 2-d array; a first row with any non-numeric field is a header."""
    try:
        with open(path, newline="") as fh:
            rows = [(i, row) for i, row in enumerate(csv.reader(fh), start=1) if row and any(f.strip() for f in row)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    if rows and not all(_is_number(f) for f in rows[0][1]):
        rows = rows[1:]
    if not rows:
        raise InputError(f"{path}: no data rows")
    width = len(rows[0][1])
    out = np.empty((len(rows), width))
    for j, (line, row) in enumerate(rows):
        if len(row) != width:
            raise InputError(f"{path}: line {line}: expected {width} fields, got {len(row)}")
        for k, field in enumerate(row):
            try:
                v = float(field)
            except ValueError:
                raise InputError(f"{path}: line {line}: cannot parse {field.strip()!r} as a number") from None
            if math.isnan(v):
                raise InputError(f"{path}: line {line}: NaN is not allowed")
            out[j, k] = v
    return out


def _interval_record(ci, n: int) -> dict:
    rec = ci.to_dict()
    rec["n"] = n
    return rec


def _emit_json(doc: dict, out) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


_CI_METHODS = {
    "exact": lambda s, a, seed: median_ci_exact(s, a),
    "hoeffding": lambda s, a, seed: median_ci_hoeffding(s, a),
    "wald": lambda s, a, seed: wald_ci(s, a),
    "bootstrap": lambda s, a, seed: bootstrap_ci(s, a, seed=seed),
    "subsample": lambda s, a, seed: subsample_ci(s, a, seed=seed),
}

_ESTIMATORS = {
    "median": lambda block: median_estimator(block[:, 0]),
    "qr-slope": sim.qr_estimator,
}


def cmd_ci(args) -> int:
    table = read_table(args.input)
    if table.shape[1] != 1:
        raise InputError(f"{args.input}: expected one column, got {table.shape[1]}")
    sample = Sample(table[:, 0])
    ci = _CI_METHODS[args.method](sample, args.alpha, args.seed)
    _emit_json(_interval_record(ci, sample.n), args.out)
    return EXIT_OK


def cmd_ghulc(args) -> int:
    table = read_table(args.input)
    if args.estimator == "qr-slope" and table.shape[1] != 2:
        raise InputError(f"{args.input}: qr-slope needs two columns (x, y), got {table.shape[1]}")
    config = GhulcConfig(args.alpha, args.B, seed=args.seed)
    ci = ghulc_ci(table, config, _ESTIMATORS[args.estimator])
    rec = _interval_record(ci, table.shape[0])
    rec.update({k: ci.info[k] for k in ("B", "c", "c_star", "tau")})
    rec["estimator"] = args.estimator
    _emit_json(rec, args.out)
    return EXIT_OK


def parse_grid(spec: str) -> np.ndarray:
    """``start:stop:count`` for an even grid, or a comma-separated list of points."""
    try:
        if ":" in spec:
            start, stop, count = spec.split(":")
            count = int(count)
            if count < 1:
                raise ValueError
            grid = np.linspace(float(start), float(stop), count)
        else:
            grid = np.array([float(v) for v in spec.split(",")])
    except ValueError:
        raise PreconditionError(f"invalid grid {spec!r}; use start:stop:count or a comma list") from None
    if not np.all(np.isfinite(grid)):
        raise PreconditionError(f"invalid grid {spec!r}: non-finite point")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise PreconditionError(f"invalid grid {spec!r}: points must increase strictly")
    return grid


def cmd_limit_density(args) -> int:
    grid = parse_grid(args.grid)
    params = NonStdParams(args.rho, args.m_minus, args.m_plus)
    dens = limit_law_density(args.alpha, params, grid, n_draws=args.draws, seed=args.seed)
    if args.out:
        write_density_csv(args.out, grid, dens)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["x", "density"])
        for x, d in zip(grid, dens):
            w.writerow([repr(float(x)), repr(float(d))])
    return EXIT_OK


_SIM_KEYS = {
    "coverage": {"methods", "n_list", "rho_list"},
    "ghulc": {"n_list", "beta_list", "B_list"},
    "width-limit": {"rho", "n"},
}
_COMMON_KEYS = {"experiment", "alpha", "replications", "seed", "output_dir"}
_OPTIONAL_KEYS = {"n_boot", "n_sub", "include_hulc"}


def load_sim_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path}: invalid JSON at line {exc.lineno}") from None
    if not isinstance(cfg, dict):
        raise InputError("config must be a JSON object")
    kind = cfg.get("experiment")
    if kind not in _SIM_KEYS:
        raise InputError(f"config key 'experiment' must be one of {sorted(_SIM_KEYS)}, got {kind!r}")
    for key in sorted(_COMMON_KEYS | _SIM_KEYS[kind]):
        if key not in cfg:
            raise InputError(f"config key {key!r} is missing")
    unknown = set(cfg) - _COMMON_KEYS - _SIM_KEYS[kind] - _OPTIONAL_KEYS
    if unknown:
        raise InputError(f"config key {sorted(unknown)[0]!r} is not recognised")
    checks = {
        "alpha": lambda v: isinstance(v, (int, float)) and 0 < v < 1,
        "replications": lambda v: isinstance(v, int) and v >= 1,
        "seed": lambda v: isinstance(v, int) and v >= 0,
        "output_dir": lambda v: isinstance(v, str) and v != "",
        "methods": lambda v: isinstance(v, list) and v and all(isinstance(m, str) for m in v),
        "n_list": lambda v: isinstance(v, list) and v and all(isinstance(n, int) and n >= 1 for n in v),
        "rho_list": lambda v: isinstance(v, list) and v and all(isinstance(r, (int, float)) and r > 0 for r in v),
        "beta_list": lambda v: isinstance(v, list) and v and all(isinstance(r, (int, float)) and r > 0 for r in v),
        "B_list": lambda v: isinstance(v, list) and v and all(isinstance(b, int) and b >= 1 for b in v),
        "rho": lambda v: isinstance(v, (int, float)) and v > 0,
        "n": lambda v: isinstance(v, int) and v >= 1,
        "n_boot": lambda v: isinstance(v, int) and v >= 100,
        "n_sub": lambda v: isinstance(v, int) and v >= 1,
        "include_hulc": lambda v: isinstance(v, bool),
    }
    for key, value in cfg.items():
        if key in checks and not checks[key](value):
            raise InputError(f"config key {key!r} has an invalid value {value!r}")
    return cfg


def cmd_simulate(args) -> int:
    cfg = load_sim_config(args.config)
    out = Path(cfg["output_dir"])
    if not out.is_absolute():
        out = Path(args.config).resolve().parent / out
    out.mkdir(parents=True, exist_ok=True)
    kind, alpha, reps, seed = cfg["experiment"], cfg["alpha"], cfg["replications"], cfg["seed"]
    meta = {k: cfg[k] for k in sorted(cfg) if k != "output_dir"}
    try:
        if kind == "coverage":
            reports = sim.run_coverage_experiment(
                cfg["methods"], cfg["n_list"], cfg["rho_list"], alpha, reps, seed,
                n_boot=cfg.get("n_boot", 1000), n_sub=cfg.get("n_sub", 1000),
            )
        elif kind == "ghulc":
            reports = sim.run_ghulc_experiment(
                cfg["n_list"], cfg["beta_list"], cfg["B_list"], alpha, reps, seed,
                include_hulc=cfg.get("include_hulc", True),
            )
        else:
            widths, limit = sim.run_width_limit_experiment(cfg["rho"], alpha, cfg["n"], reps, seed)
            with open(out / "widths.csv", "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["index", "scaled_width", "limit_draw"])
                for i, (a, b) in enumerate(zip(widths, limit)):
                    w.writerow([i, repr(float(a)), repr(float(b))])
            meta["ks_distance"] = sim.ks_distance(widths, limit)
            _emit_json({"meta": meta}, out / "report.json")
            return EXIT_OK
    except ValueError as exc:
        if isinstance(exc, PreconditionError):
            raise
        raise InputError(f"config rejected: {exc}") from None
    sim.write_summary_csv(reports, out / "summary.csv")
    sim.write_widths_csv(reports, out / "widths.csv")
    sim.write_reports_json(reports, out / "report.json", meta)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="medquant", description="Median confidence intervals and related experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--alpha", type=float, default=0.05, help="miscoverage level (default 0.05)")
        p.add_argument("--seed", type=int, default=0, help="nonnegative seed (default 0)")
        p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("ci", help="median interval for one numeric CSV column")
    p.add_argument("input")
    p.add_argument("--method", choices=sorted(_CI_METHODS), default="exact")
    common(p)
    p.set_defaults(func=cmd_ci)

    p = sub.add_parser("ghulc", help="randomized split-and-rank interval over CSV rows")
    p.add_argument("input")
    p.add_argument("--B", type=int, required=True, help="number of blocks")
    p.add_argument("--estimator", choices=sorted(_ESTIMATORS), default="median")
    common(p)
    p.set_defaults(func=cmd_ghulc)

    p = sub.add_parser("limit-density", help="kernel density of the limiting scaled width on a grid")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--m-minus", type=float, default=0.5)
    p.add_argument("--m-plus", type=float, default=0.5)
    p.add_argument("--grid", default="0:4:401", help="start:stop:count or comma list")
    p.add_argument("--draws", type=int, default=100_000)
    common(p)
    p.set_defaults(func=cmd_limit_density)

    p = sub.add_parser("simulate", help="run an experiment described by a JSON config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", 0) < 0:
        parser.error("--seed must be nonnegative")
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"medquant: precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (InputError, ValueError) as exc:
        print(f"medquant: {exc}", file=sys.stderr)
        return EXIT_INPUT
