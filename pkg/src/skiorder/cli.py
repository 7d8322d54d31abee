"""Command-line front end: ``skiorder {simulate,ca,analyze,ensemble,bounds}``.

Options may also come from a JSON file given with ``--config``; its keys are
the option names with dashes replaced by underscores.  Command-line flags win
over file values, which win over built-in defaults.

Exit codes: 0 success (including undefined knees), 1 runtime or I/O failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from skiorder import ensemble, io, lambda_ca, swarmsim
from skiorder.errors import ConfigError, SkiOrderError
from skiorder.metrics import metrics_from_curve, noise_bounds
from skiorder.svknee import singular_curve
from skiorder.trajmat import DEFAULT_VARIANCE_FLOOR, preprocess

log = logging.getLogger("skiorder")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


SIM_DEFAULTS = {
    "model": None,
    "agents": 50,
    "steps": 500,
    "dt": 1.0,
    "seed": 0,
    "mu": 0.3,
    "K": 1.0,
    "beta": 0.4,
    "radius": 1.0,
    "speed": 0.5,
    "box_size": 10.0,
    "freq_f": 1.0,
    "noise": False,
    "noise_fraction": swarmsim.MEASUREMENT_NOISE_FRACTION,
    "labels": False,
}

CA_DEFAULTS = {
    "lambda_": 0.33,
    "cells": 230,
    "steps": 443,
    "states": 4,
    "neighbors": 5,
    "anisotropic": False,
    "seed": 0,
    "world_seed": None,
    "pgm": None,
}

ENSEMBLE_DEFAULTS = {
    "full_ladder": False,
    "ca": False,
    "models": None,
    "trials": None,
    "seed": 0,
    "agents": 50,
    "steps": 500,
    "mu": 0.3,
    "lambdas": None,
    "summary": None,
    "workers": None,
}


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """Merge built-in defaults, the optional JSON config file and explicit flags."""
    resolved = dict(defaults)
    if getattr(args, "config", None):
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from exc
        for key, value in file_cfg.items():
            key = key.replace("-", "_")
            if key == "lambda":
                key = "lambda_"
            if key not in defaults:
                raise UsageError(f"unknown config key {key!r}")
            resolved[key] = value
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    return resolved


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".config.json")


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def cmd_simulate(args) -> int:
    opts = _resolve(args, SIM_DEFAULTS)
    if opts["model"] is None:
        raise UsageError("--model is required")
    if opts["model"] not in swarmsim.MODELS:
        raise UsageError(f"unknown model {opts['model']!r}; choose from {', '.join(swarmsim.MODELS)}")
    try:
        cfg = swarmsim.SimConfig(
            model=opts["model"],
            n_agents=int(opts["agents"]),
            n_steps=int(opts["steps"]),
            dt=float(opts["dt"]),
            seed=int(opts["seed"]),
            mu=float(opts["mu"]),
            K=float(opts["K"]),
            beta=float(opts["beta"]),
            radius=float(opts["radius"]),
            speed=float(opts["speed"]),
            box_size=float(opts["box_size"]),
            freq_f=float(opts["freq_f"]),
            measurement_noise=bool(opts["noise"]),
            noise_fraction=float(opts["noise_fraction"]),
        )
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    X = swarmsim.simulate(cfg)
    out = Path(args.output)
    io.write_matrix_csv(out, X, io.swarm_labels(X) if opts["labels"] else None)
    _write_json(_sidecar(out), {"command": "simulate", "labels": bool(opts["labels"]), **cfg.to_dict()})
    log.info("wrote %dx%d trajectory matrix to %s", *X.shape, out)
    return EXIT_OK


def cmd_ca(args) -> int:
    opts = _resolve(args, CA_DEFAULTS)
    world_seed = opts["seed"] if opts["world_seed"] is None else opts["world_seed"]
    try:
        cfg = lambda_ca.CAConfig(
            lam=float(opts["lambda_"]),
            n_cells=int(opts["cells"]),
            n_steps=int(opts["steps"]),
            states=int(opts["states"]),
            neighbors=int(opts["neighbors"]),
            isotropic=not opts["anisotropic"],
            rule_seed=int(opts["seed"]),
            world_seed=int(world_seed),
        )
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    trace = lambda_ca.run(cfg)
    out = Path(args.output)
    io.write_matrix_csv(out, trace.grid)
    if opts["pgm"]:
        io.write_pgm(opts["pgm"], trace.grid, cfg.states)
    sidecar = {"command": "ca", "lambda": cfg.lam, "world_seed": cfg.world_seed, "rule_seed": cfg.rule_seed}
    sidecar.update({k: v for k, v in vars(cfg).items() if k not in ("lam", "world_seed", "rule_seed")})
    _write_json(_sidecar(out), sidecar)
    return EXIT_OK


def analyze_file(path, variance_floor: float = DEFAULT_VARIANCE_FLOOR):
    X = io.read_matrix_csv(path)
    curve = singular_curve(preprocess(X, variance_floor))
    return curve, metrics_from_curve(curve)


def cmd_analyze(args) -> int:
    floor = DEFAULT_VARIANCE_FLOOR if args.variance_floor is None else args.variance_floor
    curve, report = analyze_file(args.input, floor)
    text = io.report_json(report)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    if args.curve:
        io.write_curve_csv(args.curve, curve)
    return EXIT_OK


def cmd_ensemble(args) -> int:
    opts = _resolve(args, ENSEMBLE_DEFAULTS)
    out = Path(args.output)
    summary_path = Path(opts["summary"]) if opts["summary"] else out.with_suffix(".summary.csv")
    workers = None if opts["workers"] is None else int(opts["workers"])

    if opts["ca"]:
        lambdas = lambda_ca.LAMBDA_GRID if opts["lambdas"] is None else _floats(opts["lambdas"])
        trials = 5 if opts["trials"] is None else int(opts["trials"])
        results = ensemble.run_ca_ensemble(lambdas, trials, int(opts["seed"]), workers=workers)
        summary = ensemble.summary_table(results, group_key=lambda r: dict(r.extra)["lambda"])
        for row in summary:
            row["lambda"] = row.pop("model")
        summary_cols = ["lambda", "metric", "n", "mean", "median", "std_sample", "q1", "q3", "iqr"]
        resolved = {"lambdas": list(lambdas), "trials": trials}
    else:
        if opts["full_ladder"]:
            models, trials = ensemble.DEFAULT_MODELS, ensemble.DEFAULT_TRIALS
            sim = {"n_agents": 50, "n_steps": 500, "mu": 0.3}
        else:
            models = ensemble.DEFAULT_MODELS if opts["models"] is None else _model_list(opts["models"])
            trials = ensemble.DEFAULT_TRIALS if opts["trials"] is None else int(opts["trials"])
            sim = {"n_agents": int(opts["agents"]), "n_steps": int(opts["steps"]), "mu": float(opts["mu"])}
        try:
            spec = ensemble.EnsembleSpec(models, trials, int(opts["seed"]), sim)
        except (ValueError, ConfigError) as exc:
            raise UsageError(str(exc)) from exc
        results = ensemble.run_ensemble(spec, workers=workers)
        summary = ensemble.summary_table(results)
        summary_cols = ["model", "metric", "n", "mean", "median", "std_sample", "q1", "q3", "iqr"]
        resolved = {"models": [ensemble.model_label(*m) for m in models], "trials": trials, "sim_defaults": sim}

    rows = [r.row() for r in results]
    io.write_rows_csv(out, rows, io.ensemble_columns(rows))
    io.write_rows_csv(summary_path, summary, summary_cols)
    _write_json(_sidecar(out), {"command": "ensemble", "ca": bool(opts["ca"]), "seed": int(opts["seed"]), **resolved})
    failed = sum(1 for r in results if r.error)
    log.info("%d trials (%d failed) -> %s, summary -> %s", len(rows), failed, out, summary_path)
    return EXIT_OK


def cmd_bounds(args) -> int:
    try:
        b = noise_bounds(args.rows, args.cols)
    except SkiOrderError as exc:
        raise UsageError(str(exc)) from exc
    if args.format == "csv":
        sys.stdout.write("lower,upper,kappa\n" + ",".join(io.fmt(v) for v in (b.lower, b.upper, b.kappa)) + "\n")
    else:
        sys.stdout.write(json.dumps({"lower": b.lower, "upper": b.upper, "kappa": b.kappa}) + "\n")
    return EXIT_OK


def _floats(value) -> list[float]:
    if isinstance(value, str):
        return [float(v) for v in value.split(",") if v.strip()]
    return [float(v) for v in value]


def _model_list(value) -> list[tuple[str, bool]]:
    names = value.split(",") if isinstance(value, str) else list(value)
    out = []
    for name in names:
        name = name.strip()
        noisy = name.endswith("+noise")
        base = name[: -len("+noise")] if noisy else name
        if base not in swarmsim.MODELS:
            raise UsageError(f"unknown model {base!r}; choose from {', '.join(swarmsim.MODELS)}")
        out.append((base, noisy))
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="skiorder", description="Singular-value knee analysis of trajectories.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="generate a swarm trajectory CSV")
    s.add_argument("--model", choices=swarmsim.MODELS)
    s.add_argument("--agents", type=int)
    s.add_argument("--steps", type=int)
    s.add_argument("--dt", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--mu", type=float)
    s.add_argument("--K", type=float)
    s.add_argument("--beta", type=float)
    s.add_argument("--radius", type=float)
    s.add_argument("--speed", type=float)
    s.add_argument("--box-size", type=float)
    s.add_argument("--freq-f", type=float)
    s.add_argument("--noise", action="store_true", default=None, help="add 5%% measurement noise")
    s.add_argument("--noise-fraction", type=float)
    s.add_argument("--labels", action="store_true", default=None, help="write a label header/column")
    s.add_argument("--config")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("ca", help="run the lambda cellular automaton and write its cell x time grid")
    c.add_argument("--lambda", dest="lambda_", type=float)
    c.add_argument("--cells", type=int)
    c.add_argument("--steps", type=int)
    c.add_argument("--states", type=int)
    c.add_argument("--neighbors", type=int)
    c.add_argument("--anisotropic", action="store_true", default=None)
    c.add_argument("--seed", type=int, help="rule seed (also world seed unless --world-seed)")
    c.add_argument("--world-seed", type=int)
    c.add_argument("--pgm", help="also write an 8-bit PGM image")
    c.add_argument("--config")
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_ca)

    a = sub.add_parser("analyze", help="compute knee metrics of a matrix CSV")
    a.add_argument("input")
    a.add_argument("-o", "--output", help="metrics JSON path (default stdout)")
    a.add_argument("--curve", help="also write the singular value curve CSV")
    a.add_argument("--variance-floor", type=float)
    a.set_defaults(func=cmd_analyze)

    e = sub.add_parser("ensemble", help="batch runs with per-trial metrics and summary statistics")
    e.add_argument("--full-ladder", action="store_true", default=None, help="11 models x 25 trials, 50 agents, 500 steps")
    e.add_argument("--ca", action="store_true", default=None, help="cellular automaton lambda sweep instead of swarms")
    e.add_argument("--models", help="comma-separated, e.g. vicsek,vicsek+noise")
    e.add_argument("--trials", type=int)
    e.add_argument("--seed", type=int)
    e.add_argument("--agents", type=int)
    e.add_argument("--steps", type=int)
    e.add_argument("--mu", type=float)
    e.add_argument("--lambdas", help="comma-separated lambda values for --ca")
    e.add_argument("--summary", help="summary CSV path (default <output>.summary.csv)")
    e.add_argument("--workers", type=int, help="parallel processes (default $SKIORDER_THREADS or CPU count)")
    e.add_argument("--config")
    e.add_argument("-o", "--output", required=True)
    e.set_defaults(func=cmd_ensemble)

    b = sub.add_parser("bounds", help="Marcenko-Pastur singular value bounds for a matrix shape")
    b.add_argument("--rows", type=int, required=True)
    b.add_argument("--cols", type=int, required=True)
    b.add_argument("--format", choices=("json", "csv"), default="json")
    b.set_defaults(func=cmd_bounds)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"skiorder: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, SkiOrderError) as exc:
        print(f"skiorder: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
