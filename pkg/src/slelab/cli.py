"""Command line: ``slelab run|validate|render``.

Exit status 0 on success, 2 on an invalid config (a JSON error report goes to
stderr), 1 on other failures.  The default output directory (``results``) can
be overridden with the SLELAB_OUTPUT_DIR environment variable; ``--out`` and
the config's ``output_dir`` take precedence over both.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import ConfigError, FieldError, load_config
from .errors import SLELabError
from .loewner import CurveTrace
from .output import render_traces

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2


def _report(payload: dict) -> None:
    sys.stderr.write(json.dumps(payload, indent=2) + "\n")


def _load(path: str, seed=None, workers=None, out=None):
    cfg = load_config(path)
    return cfg.with_overrides(seed=seed, workers=workers, out=out)


def cmd_validate(args) -> int:
    cfg = _load(args.config, args.seed, args.workers, args.out)
    print(json.dumps({"status": "valid", "experiment": cfg.experiment.value, "experiment_id": cfg.id}))
    return EXIT_OK


def cmd_run(args) -> int:
    from .runner import run_experiment

    cfg = _load(args.config, args.seed, args.workers, args.out)
    outcome = run_experiment(cfg)
    print(json.dumps({"status": "ok", "rows": len(outcome.rows), "files": {k: str(v) for k, v in outcome.paths.items()}}))
    return outcome.status


def cmd_render(args) -> int:
    data = json.loads(Path(args.trace_file).read_text())
    if isinstance(data, list):
        data = {"traces": data}
    if not isinstance(data, dict) or "traces" not in data:
        raise ConfigError([FieldError("traces", "trace file must hold a 'traces' list")])
    traces = [CurveTrace.from_dict(d) for d in data["traces"]]
    targets = [complex(a, b) for a, b in data.get("targets", [])]
    radii = [float(r) for r in data.get("radii", [])]
    out = Path(args.out) if args.out else Path(args.trace_file).with_suffix(".svg")
    if out.is_dir():
        out = out / (Path(args.trace_file).stem + ".svg")
    render_traces(traces, targets, radii, out, max_points=args.max_points)
    print(json.dumps({"status": "ok", "svg": str(out), "traces": len(traces)}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slelab", description="Chordal SLE simulation and Green's-function experiments")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=None, help="override master_seed")
        sp.add_argument("--workers", type=int, default=None, help="override the worker count")
        sp.add_argument("--out", default=None, help="override the output directory")

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    common(r)
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="validate a config without running it")
    v.add_argument("config")
    common(v)
    v.set_defaults(func=cmd_validate)

    d = sub.add_parser("render", help="render a trace file to SVG")
    d.add_argument("trace_file")
    d.add_argument("--out", default=None, help="SVG path (default: next to the trace file)")
    d.add_argument("--max-points", type=int, default=2000, help="per-trace point decimation")
    d.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)
    d.add_argument("--workers", type=int, default=None, help=argparse.SUPPRESS)
    d.set_defaults(func=cmd_render)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _report(exc.report())
        return EXIT_INVALID
    except SLELabError as exc:
        _report({"status": "error", "type": type(exc).__name__, "message": str(exc)})
        return EXIT_INVALID
    except OSError as exc:
        _report({"status": "io-error", "message": str(exc), "filename": getattr(exc, "filename", None)})
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
