"""Command-line entry point.

    usdqpsk preset fig4 --seed 1 --out fig4.csv
    usdqpsk sweep my.cfg --trials 10000
    usdqpsk bound --alpha-sq-range 0:4:0.25
    usdqpsk lut --stages 10

Exit status: 0 on success, 1 for invalid input, 2 for runtime or numerical
failures.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from . import __version__
from .bounds import optimal_conclusive_probability
from .config import ConfigError, parse_config
from .errors import ConfigurationError
from .experiments import (
    PRESETS,
    SCHEMA_LINE,
    ResultRow,
    preset_configs,
    run_experiment,
    write_csv,
)
from .receivers import ReceiverConfig, build_lookup_table

log = logging.getLogger("usdqpsk")


def _range(text: str) -> tuple[float, float, float]:
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}")
    if step <= 0 or stop < start or start < 0:
        raise argparse.ArgumentTypeError(f"need 0 <= start <= stop and step > 0, got {text!r}")
    return start, stop, step


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per batch")
    p.add_argument("--batches", type=int, help="independent batches for error bars")
    p.add_argument("--workers", type=int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("--out", help="output file (default: stdout for CSV)")
    p.add_argument("--summary", help="also write a JSON summary to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="usdqpsk", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preset", help="run a named parameter-sweep preset and write CSV")
    p.add_argument("name", choices=sorted(PRESETS))
    _common(p)

    p = sub.add_parser("sweep", help="run a sweep described by a key = value config file")
    p.add_argument("config")
    _common(p)

    p = sub.add_parser("bound", help="optimal USD conclusive probability")
    p.add_argument("--alpha-sq-range", type=_range, required=True, metavar="START:STOP:STEP")
    p.add_argument("--out")

    p = sub.add_parser("lut", help="export the adaptive lookup table")
    p.add_argument("--stages", type=int, required=True)
    p.add_argument("--out")
    return parser


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _summary(path: str, rows: list[ResultRow], meta: dict) -> None:
    methods = sorted({r.method for r in rows})
    doc = {"schema": SCHEMA_LINE.split("=", 1)[1], **meta, "rows": len(rows), "methods": methods}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _run_configs(cfgs, args, meta: dict) -> None:
    rows = []
    for cfg in cfgs:
        rows.extend(run_experiment(cfg, args.workers))
    _emit(write_csv(rows), args.out)
    if args.summary:
        _summary(args.summary, rows, meta)
    log.info("wrote %d rows", len(rows))


def _overrides(args) -> dict:
    return {"seed": args.seed, "trials": args.trials, "batches": args.batches}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "preset":
            cfgs = preset_configs(args.name, **_overrides(args))
            _run_configs(cfgs, args, {"preset": args.name, **_overrides(args)})
        elif args.command == "sweep":
            with open(args.config, encoding="utf-8") as fh:
                cfg = parse_config(fh.read())
            overrides = {k: v for k, v in _overrides(args).items() if v is not None}
            cfg = dataclasses.replace(cfg, **overrides)
            if args.out is None:
                args.out = cfg.output
            _run_configs([cfg], args, {"config": args.config, **overrides})
        elif args.command == "bound":
            start, stop, step = args.alpha_sq_range
            n = int((stop - start) / step + 1e-9) + 1
            lines = ["alpha_sq,p_conclusive\n"]
            for k in range(n):
                a = round(start + k * step, 12)
                lines.append(f"{a!r},{optimal_conclusive_probability(a)!r}\n")
            _emit("".join(lines), args.out)
        elif args.command == "lut":
            _emit(build_lookup_table(ReceiverConfig(args.stages)).to_text(), args.out)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return 1
    except (ConfigurationError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (RuntimeError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
