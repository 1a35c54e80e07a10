#!/usr/bin/env python3
"""Run every experiment config in a directory (default: configs/).

Each config writes into <out>/<config stem>/.  ``--samples`` caps n_samples,
which is handy for a quick smoke pass before a full run.
"""

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

from slelab.config import ConfigError, load_config
from slelab.runner import run_experiment


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("configs", nargs="*", help="config files (default: every *.json in configs/)")
    ap.add_argument("--out", default="results", help="output root")
    ap.add_argument("--samples", type=int, default=None, help="cap n_samples")
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args(argv)

    root = Path(__file__).resolve().parents[1]
    paths = [Path(p) for p in args.configs] or sorted((root / "configs").glob("*.json"))
    status = 0
    for path in paths:
        try:
            cfg = load_config(path)
        except ConfigError as exc:
            print(json.dumps({"config": str(path), **exc.report()}), file=sys.stderr)
            status = 2
            continue
        if args.samples is not None:
            cfg = replace(cfg, n_samples=min(cfg.n_samples, args.samples))
        cfg = cfg.with_overrides(workers=args.workers)
        t0 = time.perf_counter()
        outcome = run_experiment(cfg, str(Path(args.out) / path.stem))
        print(f"{path.stem:24s} {len(outcome.rows):3d} rows  {time.perf_counter() - t0:8.1f} s  -> {outcome.paths['csv']}")
    return status


if __name__ == "__main__":
    sys.exit(main())
