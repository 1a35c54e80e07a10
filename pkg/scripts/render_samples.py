#!/usr/bin/env python3
"""Trace a few SLE samples and write them as JSON and SVG."""

import argparse
import json
from pathlib import Path

from slelab import kappa_params
from slelab.estimator import derived_seed
from slelab.loewner import sample_driving, trace_curve
from slelab.output import render_traces


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kappa", type=float, default=8.0 / 3.0)
    ap.add_argument("-n", "--traces", type=int, default=5)
    ap.add_argument("--t", type=float, default=1.0, help="capacity time of each trace")
    ap.add_argument("--dt", type=float, default=2.5e-4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--point", type=float, nargs=2, action="append", default=None, metavar=("RE", "IM"))
    ap.add_argument("--radius", type=float, default=0.1)
    ap.add_argument("--out", default="traces")
    args = ap.parse_args(argv)

    k = kappa_params(args.kappa)
    traces = [trace_curve(sample_driving(k, args.t, args.dt, derived_seed(args.seed, i))) for i in range(args.traces)]
    pts = [complex(a, b) for a, b in (args.point or [])]
    radii = [args.radius] * len(pts)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    payload = {"targets": [[z.real, z.imag] for z in pts], "radii": radii, "traces": [t.to_dict() for t in traces]}
    out.with_suffix(".json").write_text(json.dumps(payload))
    svg = render_traces(traces, pts, radii, out.with_suffix(".svg"))
    print(svg)


if __name__ == "__main__":
    main()
