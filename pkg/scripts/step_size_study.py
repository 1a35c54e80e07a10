#!/usr/bin/env python3
"""Hit-probability bias of the adaptive Monte Carlo step.

Runs p(dist(z, curve) <= r) for z = i and z = 1 + i at r = 0.4, 0.2, 0.1 for a
list of relative step sizes eta (eta = 0 is the uniform grid at --dt) and
prints the estimates, the i / (1+i) ratio and the cost per sample.
"""

import argparse
import time

import numpy as np

from slelab import estimator as est
from slelab import kappa_params


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kappa", type=float, default=8.0 / 3.0)
    ap.add_argument("--eta", type=float, nargs="+", default=[0.3, 0.2, 0.1])
    ap.add_argument("-n", "--samples", type=int, default=20_000)
    ap.add_argument("--dt", type=float, default=2.5e-5)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--no-refine", action="store_true")
    args = ap.parse_args(argv)

    k = kappa_params(args.kappa)
    sched = [(0.4,), (0.2,), (0.1,)]
    print(f"kappa={k.kappa:g} N={args.samples} dt={args.dt:g}")
    print(f"{'eta':>5} {'z':>6} " + " ".join(f"{'p(r=' + str(r[0]) + ')':>14}" for r in sched) + f" {'ms/sample':>10}")
    for eta in args.eta:
        engine = est.EngineSettings(eta=eta, refine=not args.no_refine)
        p = {}
        for z in (1j, 1 + 1j):
            s = est.Scenario.make(k, [z], sched[0], args.samples, dt=args.dt, master_seed=args.seed, engine=engine)
            t0 = time.perf_counter()
            table = est.convergence_sweep(s, sched)
            ms = 1e3 * (time.perf_counter() - t0) / max(args.samples, 1)
            p[z] = np.array([g.raw_mean for g in table])
            se = [g.raw_stderr for g in table]
            cells = " ".join(f"{m:8.4f}+-{e:.4f}" for m, e in zip(p[z], se))
            print(f"{eta:5.2f} {str(z):>6} {cells} {ms:10.2f}")
        print(f"{'':5} {'ratio':>6} " + " ".join(f"{q:14.4f}" for q in p[1j] / p[1 + 1j]))


if __name__ == "__main__":
    main()
