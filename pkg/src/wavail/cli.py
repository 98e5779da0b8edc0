"""Command-line entry point.

Usage::

    wavail <scenario> [--config PATH] [--seed N] [--out DIR]
                      [--override key=value ...]

Exit codes: 0 on success, 2 on configuration errors, 3 on numerical
failure (requested truncation tolerance out of reach).
"""

from __future__ import annotations

import argparse
import sys

from .ctmc import TruncationError
from .experiments import SCENARIOS, ConfigError, load_config, run_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavail",
        description="Seeded space-time availability scenarios with CSV outputs.",
    )
    parser.add_argument("scenario", choices=SCENARIOS, help="scenario to run")
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--seed", type=int, help="override the run seed")
    parser.add_argument("--out", help="override the output directory")
    parser.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a single config key (repeatable; applied in order)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(
            args.scenario,
            path=args.config,
            overrides=args.override,
            seed=args.seed,
            out=args.out,
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        manifest = run_scenario(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except TruncationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    for name in sorted(manifest.outputs):
        print(f"wrote {cfg.output_dir}/{name}")
    print(f"wrote {cfg.output_dir}/manifest.json")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
