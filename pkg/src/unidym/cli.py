"""``unidym <experiment-id> --config <path> [--out DIR] [--format csv|jsonl] [--seed N] [--plot KIND]``.

Exit codes: 0 ran (records may carry flags), 2 usage, 3 I/O, 4 internal
invariant breach.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import InvariantError, PreconditionError
from .harness.config import FORMATS, ConfigError, ExperimentConfig
from .harness.experiments import REGISTRY, run_experiment
from .harness.plot import KINDS, plot
from .harness.records import emit

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INTERNAL = 0, 2, 3, 4

log = logging.getLogger("unidym")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="unidym", description="Run a numerical verification experiment.")
    p.add_argument("experiment", help="experiment id; one of: " + ", ".join(sorted(REGISTRY)))
    p.add_argument("--config", required=True, help="flat key = value config file")
    p.add_argument("--out", help="output directory (overrides output.dir)")
    p.add_argument("--format", choices=FORMATS, help="overrides output.format")
    p.add_argument("--seed", type=int, help="overrides run.seed")
    p.add_argument("--plot", choices=KINDS, help="also write an SVG plot")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _run(argv) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.experiment not in REGISTRY:
        raise ConfigError(f"unknown experiment {args.experiment!r}; known: {', '.join(sorted(REGISTRY))}")
    try:
        cfg = ExperimentConfig.load(args.config, args.experiment)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {args.config}") from None
    if args.out is not None:
        cfg.out_dir = args.out
    if args.format is not None:
        cfg.format = args.format
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.validate()

    records = run_experiment(cfg)
    out = Path(cfg.out_dir) / f"{cfg.experiment}.{cfg.format}"
    emit(records, out, cfg.format, cfg.experiment, cfg.seed)
    counts = {}
    for r in records:
        counts[r.status] = counts.get(r.status, 0) + 1
    print(f"{cfg.experiment}: {len(records)} records {counts} -> {out}")
    if args.plot:
        svg = plot(records, args.plot, Path(cfg.out_dir) / f"{cfg.experiment}-{args.plot}.svg")
        print(f"plot -> {svg}")
    return EXIT_OK


def main(argv=None) -> int:
    try:
        code = _run(sys.argv[1:] if argv is None else argv)
    except InvariantError as e:
        print(f"unidym: internal invariant breached: {e}", file=sys.stderr)
        code = EXIT_INTERNAL
    except (ConfigError, PreconditionError) as e:
        print(f"unidym: usage error: {e}", file=sys.stderr)
        code = EXIT_USAGE
    except OSError as e:
        print(f"unidym: I/O error: {e}", file=sys.stderr)
        code = EXIT_IO
    if argv is None:
        sys.exit(code)
    return code


if __name__ == "__main__":
    main()
