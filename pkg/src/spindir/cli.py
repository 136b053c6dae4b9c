"""Command-line entry point.

    spindir run --config cfg.json [--out F] [--format csv|json]
                [--seed S] [--threads N]
    spindir selftest [--seed S]

Exit codes: 0 success, 1 selftest failure, 2 config error, 3 numerical
defect (failed quadrature self-check).
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import ConfigError, emit, parse_config, run
from .pointer import QuadratureError
from .selftest import run_selftest


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spindir")
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run a configured experiment")
    runp.add_argument("--config", required=True, help="path to a JSON config")
    runp.add_argument("--out", help="output path (overrides config)")
    runp.add_argument("--format", choices=("csv", "json"), help="output format")
    runp.add_argument("--seed", type=int, help="seed (overrides config)")
    runp.add_argument("--threads", type=int, help="worker threads, 0 = all cores")

    selfp = sub.add_parser("selftest", help="run the fast invariant suite")
    selfp.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_run(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        print(f"config error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"config error: {args.config} is not valid JSON: {exc}", file=sys.stderr)
        return 2
    if not isinstance(raw, dict):
        print("config error: top level must be a JSON object", file=sys.stderr)
        return 2
    for flag in ("out", "format", "seed", "threads"):
        value = getattr(args, flag)
        if value is not None:
            raw[flag] = value
    try:
        cfg = parse_config(raw)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        table = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except QuadratureError as exc:
        print(f"numerical defect: {exc}", file=sys.stderr)
        return 3
    out = cfg.out or "result." + cfg.format
    try:
        emit(table, cfg.format, out)
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {len(table.rows)} rows to {out} "
        f"({table.meta['runtime_seconds']:.1f} s)",
        file=sys.stderr,
    )
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "selftest":
        return run_selftest(seed=args.seed)
    return _cmd_run(args)


if __name__ == "__main__":
    raise SystemExit(main())
