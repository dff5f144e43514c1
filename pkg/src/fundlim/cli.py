"""Command-line entry point: ``fundlim <subcommand> [options]``."""
from __future__ import annotations

import argparse
import os
import sys

from fundlim.config import ConfigError, load_config, validate_config
from fundlim.runner import EXIT_CONFIG, run_experiment
from fundlim.serialize import dumps

SUBCOMMANDS = {
    "pack": "packing",
    "divergence": "divergence",
    "fano": "fano",
    "meta-verify": "meta_verify",
    "theorem2": "theorem2",
    "theorem3": "theorem3",
    "identify": "identify",
    "regret": "control_regret",
    "pe": "pe_check",
    "min-time": "min_time",
}
SEED_ENV = "FUNDLIM_SEED"


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fundlim", description="Fundamental-limit experiments for identification and adaptive control.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, experiment in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run the {experiment} experiment")
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--seed", type=_u64, help=f"base seed (overrides the config and ${SEED_ENV})")
        p.add_argument("--trials", type=int, help="Monte-Carlo trials")
        p.add_argument("--workers", type=int, help="worker threads")
        p.add_argument("--out", help="write the run record here (JSON; curves also as CSV)")
    return parser


def resolve_config(args, environ=None):
    """Config file < environment seed < command-line flags; the subcommand fixes the experiment."""
    environ = os.environ if environ is None else environ
    raw = {}
    if args.config:
        raw = load_config(args.config).to_dict()
    raw["experiment"] = SUBCOMMANDS[args.command]
    errors = []
    if environ.get(SEED_ENV):
        try:
            raw["base_seed"] = _u64(environ[SEED_ENV])
        except (ValueError, argparse.ArgumentTypeError):
            errors.append(f"{SEED_ENV}: must be a 64-bit unsigned integer")
    if errors:
        raise ConfigError(errors)
    for flag, key in (("seed", "base_seed"), ("trials", "trials"), ("workers", "workers"), ("out", "output_path")):
        value = getattr(args, flag)
        if value is not None:
            raw[key] = value
    return validate_config(raw)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    try:
        record = run_experiment(cfg)
    except OSError as exc:
        print(f"output_path: cannot write {cfg.output_path}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.output_path:
        print(f"{cfg.experiment}: exit {record.exit_code}, record written to {cfg.output_path}")
    else:
        print(dumps(record))
    return record.exit_code


if __name__ == "__main__":
    sys.exit(main())
