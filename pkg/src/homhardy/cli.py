"""Command line entry point: ``homhardy {verify,sharpness,all} RUN_FILE``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, load_config
from .runner import csv_text, emit, json_text, run_suite


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homhardy",
        description="Check Hardy and Rellich identities, inequalities and sharp constants "
                    "on homogeneous groups.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {"verify": "run the identity jobs", "sharpness": "run the sharpness sweeps",
             "all": "run everything"}
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("config", help="JSON run file")
        p.add_argument("--out", help="output directory (overrides output.dir)")
        p.add_argument("--format", choices=("json", "csv", "both"),
                       help="output format (overrides output.format)")
        p.add_argument("--workers", type=int, default=1, help="worker processes")
        p.add_argument("--seed", type=int, help="global seed (overrides the run file)")
        p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return parser


def _summary(result) -> str:
    lines = []
    for e in result.jobs:
        rep = e.get("report") or {}
        rel = rep.get("rel_residual")
        tail = f"rel_residual={rel:.3e}" if rel is not None else e.get("error", "")
        if e["status"] == "degenerate_constant":
            tail += " (inequality constant undefined)"
        lines.append(f"[{'PASS' if e['pass'] else 'FAIL'}] job {e['index']} {e['identity']} "
                     f"{e['params']} {e['path']}: {tail}")
    for e in result.sweeps:
        c = e.get("curve")
        tail = (f"best ratio {max(c['ratios']):.5f} of target {c['target']:.6g}" if c
                else e["error"])
        lines.append(f"[{'PASS' if e['pass'] else 'FAIL'}] sweep {e['index']} "
                     f"{e['inequality']} {e['params']}: {tail}")
    for e in result.optimizations:
        tail = (f"quotient {e['quotient']:.6g} of target {e['target']:.6g}"
                if e.get("error") is None else e["error"])
        lines.append(f"[{'PASS' if e['pass'] else 'FAIL'}] optimize {e['index']} "
                     f"{e['inequality']} {e['params']}: {tail}")
    lines.append(f"overall: {'PASS' if result.passed else 'FAIL'}")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return 2
    try:
        config = load_config(args.config, seed=args.seed)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    result = run_suite(config, args.command, args.workers)
    out_dir = args.out or config.output["dir"]
    fmt = args.format or config.output["format"]
    try:
        paths = emit(result, out_dir, fmt, config.output["prefix"])
    except OSError as exc:
        # keep the numbers even when the directory is unusable
        print(f"error: could not write to {out_dir}: {exc}", file=sys.stderr)
        sys.stdout.write(json_text(result.to_dict()) if fmt != "csv" else csv_text(result))
        return 2
    print(_summary(result))
    for p in paths:
        print(f"wrote {p}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
