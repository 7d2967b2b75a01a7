"""Command-line entry point: ``gibbspost {run, validate, plot, list-examples}``.

Exit codes: 0 ok, 2 configuration fault, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .config import bundled_config_path, bundled_configs, load_config, validate_config
from .errors import ConfigError, DegeneratePosteriorError, FitError, InputError, NumericError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _resolve(source: str) -> Path:
    path = Path(source)
    if path.exists() or source not in bundled_configs():
        return path
    return bundled_config_path(source)


def _cmd_run(args) -> int:
    try:
        cfg = load_config(_resolve(args.config))
    except ConfigError as exc:
        for f in exc.faults:
            _err(f)
        return EXIT_CONFIG
    if args.replicas is not None and args.replicas < 1:
        _err("--replicas: must be >= 1")
        return EXIT_CONFIG
    if args.seed is not None and not 0 <= args.seed < 2**64:
        _err("--seed: must be an unsigned 64-bit integer")
        return EXIT_CONFIG
    cfg = cfg.with_overrides(seed=args.seed, replicas=args.replicas)
    out = Path(args.out) if args.out else Path("runs") / cfg.name
    from .experiment import run_experiment

    t0 = time.perf_counter()
    try:
        man = run_experiment(cfg, out, workers=args.workers, log=None if args.quiet else _err)
    except (NumericError, DegeneratePosteriorError, FitError, FloatingPointError) as exc:
        _err(f"numeric failure: {exc}")
        return EXIT_NUMERIC
    except (InputError, ConfigError) as exc:
        _err(f"configuration fault: {exc}")
        return EXIT_CONFIG
    elapsed = time.perf_counter() - t0
    if not args.quiet:
        budget = f" (budget {cfg.time_budget_s:g} s)" if cfg.time_budget_s else ""
        _err(f"{man['name']}: {man['state']} in {elapsed:.1f} s{budget}; outputs in {out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        text = _resolve(args.config).read_text()
    except OSError as exc:
        _err(f"config: cannot read {args.config} ({exc.strerror})")
        return EXIT_CONFIG
    faults = validate_config(text)
    for f in faults:
        print(f)
    if faults:
        return EXIT_CONFIG
    print("ok")
    return EXIT_OK


def _cmd_plot(args) -> int:
    from .plot import plot_run

    run_dir = Path(args.run_dir)
    if not (run_dir / "manifest.json").exists():
        _err(f"{run_dir}: not a run directory (no manifest.json)")
        return EXIT_CONFIG
    try:
        written = plot_run(run_dir, Path(args.out) if args.out else run_dir)
    except ImportError:
        _err("plotting needs matplotlib: pip install gibbspost[plot]")
        return EXIT_CONFIG
    for p in written:
        print(p)
    return EXIT_OK


def _cmd_list(args) -> int:
    for name in bundled_configs():
        cfg = load_config(bundled_config_path(name))
        print(f"{name:<18} {cfg.description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gibbspost", description="Posterior consistency experiments on subshifts.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("--config", required=True, help="config path or bundled example name")
    r.add_argument("--seed", type=int, help="override the base seed (unsigned 64-bit)")
    r.add_argument("--replicas", type=int, help="override the replica count")
    r.add_argument("--workers", type=int, default=1, help="worker processes for replicas")
    r.add_argument("--out", help="output directory (default runs/<name>)")
    r.add_argument("--quiet", action="store_true", help="suppress progress messages")
    r.set_defaults(func=_cmd_run)

    v = sub.add_parser("validate", help="list every fault in a config")
    v.add_argument("--config", required=True)
    v.set_defaults(func=_cmd_validate)

    pl = sub.add_parser("plot", help="render the CSVs of a run directory to SVG")
    pl.add_argument("run_dir")
    pl.add_argument("--out", help="directory for SVG files (default: the run directory)")
    pl.set_defaults(func=_cmd_plot)

    ls = sub.add_parser("list-examples", help="list bundled configs")
    ls.set_defaults(func=_cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
