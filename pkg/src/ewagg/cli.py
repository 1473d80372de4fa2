"""Command-line interface for the Monte Carlo benchmark.

Subcommands:
  run       run one experiment cell and write a JSON report (+ csv exports)
  table     render a saved report as markdown or csv
  signals   export the test-signal curves as csv
  validate  run the estimator hypothesis validators on a family

``run`` options may also come from a declarative config file of
``key = value`` lines (UTF-8, # comments); command-line flags win.
Recognized keys: signal, n, sigma, smooth, reps, seed, methods,
grid_alpha, grid_w.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (
    ExperimentConfig,
    ExperimentReport,
    emit_histogram_data,
    emit_signal_data,
    emit_table,
    run_experiment,
)
from .estimators import pinsker_family, validate_setting1, validate_setting2

_BOOL = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def parse_config_file(path: str) -> dict:
    values = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = line.partition("=")
        values[key.strip()] = raw.strip()
    return values


def _config_from_args(args) -> ExperimentConfig:
    values = {}
    if args.config:
        values = parse_config_file(args.config)
    def pick(flag, key, cast, default):
        if flag is not None:
            return flag
        if key in values:
            if cast is bool:
                return _BOOL[values[key].lower()]
            return cast(values[key])
        return default
    methods = pick(args.methods, "methods", str, "ewa,ure,bjs,st")
    return ExperimentConfig(
        signal=pick(args.signal, "signal", str, "Blocks"),
        n=pick(args.n, "n", int, 256),
        sigma=pick(args.sigma, "sigma", float, 0.33),
        smooth=pick(args.smooth or None, "smooth", bool, False),
        replications=pick(args.reps, "reps", int, 1000),
        base_seed=pick(args.seed, "seed", int, 0),
        methods=tuple(m for m in methods.split(",") if m),
        grid_alpha=pick(args.grid_alpha, "grid_alpha", int, 30),
        grid_w=pick(args.grid_w, "grid_w", int, 30),
    )


def cmd_run(args) -> int:
    config = _config_from_args(args)
    report = run_experiment(config, workers=args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{config.signal.lower()}{'_smooth' if config.smooth else ''}_n{config.n}"
    report_path = out / f"{stem}.json"
    report.save(report_path)
    (out / f"{stem}.csv").write_text(emit_table(report, "csv"), encoding="utf-8")
    print(emit_table(report, "markdown"))
    print(f"report written to {report_path}")
    return 0


def cmd_table(args) -> int:
    report = ExperimentReport.load(args.report)
    fmt = {"md": "markdown", "csv": "csv"}[args.format]
    print(emit_table(report, fmt))
    return 0


def cmd_signals(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for smooth, tag in ((False, "signals"), (True, "signals_smooth")):
        path = out / f"{tag}_n{args.n}.csv"
        path.write_text(emit_signal_data(args.n, smooth), encoding="utf-8")
        print(f"wrote {path}")
    return 0


def cmd_validate(args) -> int:
    if args.family != "pinsker":
        print(f"unknown family {args.family!r}", file=sys.stderr)
        return 2
    family = pinsker_family(args.n)
    if args.setting == 1:
        report = validate_setting1(family, args.sigma**2 * np.eye(args.n))
    else:
        report = validate_setting2(family)
    status = "PASS" if report.passed else "FAIL"
    print(f"setting-{args.setting} validation: {status}")
    for key, value in report.worst.items():
        print(f"  {key}: {value:g}")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ewagg-bench", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one Monte Carlo experiment cell")
    run.add_argument("--config", help="key = value config file")
    run.add_argument("--signal", choices=None)
    run.add_argument("--n", type=int)
    run.add_argument("--sigma", type=float)
    run.add_argument("--reps", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--smooth", action="store_true", default=False)
    run.add_argument("--methods", help="comma-separated: ewa,ure,bjs,st")
    run.add_argument("--grid-alpha", dest="grid_alpha", type=int)
    run.add_argument("--grid-w", dest="grid_w", type=int)
    run.add_argument("--workers", type=int, default=0)
    run.add_argument("--out", default="reports")
    run.set_defaults(func=cmd_run)

    table = sub.add_parser("table", help="render a saved report")
    table.add_argument("report")
    table.add_argument("--format", choices=("md", "csv"), default="md")
    table.set_defaults(func=cmd_table)

    signals = sub.add_parser("signals", help="export test-signal curves")
    signals.add_argument("--n", type=int, default=256)
    signals.add_argument("--out", default="reports")
    signals.set_defaults(func=cmd_signals)

    validate = sub.add_parser("validate", help="run estimator validators")
    validate.add_argument("--family", default="pinsker")
    validate.add_argument("--setting", type=int, choices=(1, 2), default=1)
    validate.add_argument("--n", type=int, default=64)
    validate.add_argument("--sigma", type=float, default=0.33)
    validate.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
