"""Experiment orchestration: config -> estimates -> CSV / JSON / SVG on disk."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import estimator as est
from .config import ExperimentConfig, ExperimentKind
from .loewner import evolve_point, hcap_estimate, hull_support, sample_driving, trace_curve
from .output import ResultRow, emit_results, fmt_list, fmt_points, render_traces
from .sle_math import config_quantities, f_radii, green_one_point, kappa_params, pde_residual_1pt

RESULTS_CSV = "results.csv"
RESULTS_JSON = "results.json"
SUMMARY_JSON = "summary.json"
TRACES_JSON = "traces.json"
TRACES_SVG = "traces.svg"


@dataclass
class RunOutcome:
    status: int
    rows: list[ResultRow]
    paths: dict[str, Path] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)


class _RowSink:
    """Collects rows with per-row wall time."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.rows: list[ResultRow] = []
        self.walls: list[float] = []
        self._t = time.perf_counter()

    def add(self, suffix: str, points, radii, n_samples, dt, M, raw_p, stderr, rescaled, ratio):
        now = time.perf_counter()
        wall = 1000.0 * (now - self._t)
        self._t = now
        cfg = self.cfg
        eid = cfg.id if not suffix else f"{cfg.id}:{suffix}"
        self.rows.append(
            ResultRow(
                experiment_id=eid,
                kappa=cfg.kappa,
                n_points=len(points),
                points=fmt_points(points),
                radii=fmt_list(radii),
                n_samples=n_samples,
                dt=dt,
                truncation_factor=M,
                seed=cfg.master_seed,
                raw_p=raw_p,
                stderr=stderr,
                rescaled=rescaled,
                ratio_to_F=ratio,
                wall_ms=wall if cfg.record_timing else None,
            )
        )
        self.walls.append(wall)

    def restart_clock(self):
        self._t = time.perf_counter()


def _scenario(cfg: ExperimentConfig, radii) -> est.Scenario:
    return est.Scenario(
        kappa_params(cfg.kappa),
        config_quantities(cfg.complex_points),
        tuple(radii),
        cfg.n_samples,
        cfg.dt,
        cfg.truncation_factor,
        cfg.master_seed,
        est.EngineSettings(eta=cfg.eta),
    )


def _mc_rows(cfg: ExperimentConfig, sink: _RowSink, exit_factors) -> dict:
    sched = cfg.radius_schedule
    s = _scenario(cfg, sched[0])
    table = est.convergence_sweep(s, sched, workers=cfg.workers, exit_factors=exit_factors)
    if len(exit_factors) == 1:
        table = [table]
    pts = cfg.complex_points
    for e, row in enumerate(table):
        M = s.truncation_factor if exit_factors[e] is None else exit_factors[e]
        for radii, g in zip(sched, row):
            f = f_radii(s.kappa, s.config, radii).value
            sink.add(
                f"M={M:g}:r={fmt_list(radii)}", pts, radii, g.n_samples, cfg.dt, M,
                g.raw_mean, g.raw_stderr, g.mean, g.raw_mean / f,
            )
    return {}


def _run_one_point(cfg, sink):
    return _mc_rows(cfg, sink, (None,))


def _run_two_point(cfg, sink):
    M = cfg.truncation_factor
    extra = _mc_rows(cfg, sink, (M, 2.0 * M))
    # ordered split at the finest level, truncation M
    sched = cfg.radius_schedule
    s = _scenario(cfg, sched[-1])
    unordered, per_perm = est.estimate_visit_prob(s, workers=cfg.workers)
    scale = est._rescale_factor(s.kappa, s.radii)
    for perm, g in sorted(per_perm.items()):
        label = "order=" + "-".join(str(i + 1) for i in perm)
        sink.add(label, cfg.complex_points, s.radii, g.n_samples, cfg.dt, M, g.mean, g.stderr, g.mean * scale, None)
    extra["partition_identity"] = est.partition_identity_holds(unordered, per_perm)
    return extra


def _run_martingale(cfg, sink):
    z = cfg.complex_points[0]
    ests = est.martingale_estimates(
        cfg.kappa, z, cfg.times, cfg.n_samples, cfg.dt, cfg.master_seed, guard=cfg.guard,
        settings=est.UNIFORM, workers=cfg.workers,
    )
    for t, g in zip(cfg.times, ests):
        sink.add(f"t={t:g}", [z], [cfg.guard * z.imag], g.n_samples, cfg.dt, None, g.mean, g.stderr, None, None)
    return {}


def _run_ghat(cfg, sink):
    k = kappa_params(cfg.kappa)
    z1, z2 = cfg.complex_points
    (r1, r2) = cfg.radius_schedule[0]
    engine = est.EngineSettings(eta=cfg.eta)
    extra = {}
    if cfg.c_hat is None:
        rc = cfg.calibration_radius if cfg.calibration_radius is not None else r1
        cal = est.calibrate_c_hat_estimate(
            k, z1, rc, cfg.n_samples, cfg.dt, est.derived_seed(cfg.master_seed, 2), cfg.truncation_factor,
            engine, cfg.workers,
        )
        c_hat = cal.mean
        sink.add("c_hat", [z1], [rc], cal.n_samples, cfg.dt, cfg.truncation_factor, None, cal.stderr, cal.mean, None)
        extra["c_hat_stderr"] = cal.stderr
    else:
        c_hat = cfg.c_hat
    extra["c_hat"] = c_hat
    s = _scenario(cfg, (r1, r2))
    unordered, per_perm = est.estimate_visit_prob(s, workers=cfg.workers)
    scale = est._rescale_factor(k, (r1, r2))
    f = f_radii(k, s.config, (r1, r2)).value
    sink.add("direct:unordered", [z1, z2], [r1, r2], unordered.n_samples, cfg.dt, cfg.truncation_factor,
             unordered.mean, unordered.stderr, unordered.mean * scale, unordered.mean / f)
    for perm, g in sorted(per_perm.items()):
        label = "direct:order=" + "-".join(str(i + 1) for i in perm)
        sink.add(label, [z1, z2], [r1, r2], g.n_samples, cfg.dt, cfg.truncation_factor, g.mean, g.stderr, g.mean * scale, None)
    extra["partition_identity"] = est.partition_identity_holds(unordered, per_perm)
    for label, a, b, seed in (("ghat:order=1-2", z1, z2, est.derived_seed(cfg.master_seed, 3)),
                              ("ghat:order=2-1", z2, z1, est.derived_seed(cfg.master_seed, 4))):
        g = est.ghat_two_point(k, c_hat, a, b, cfg.rho1, cfg.n_samples, cfg.dt, seed, cfg.truncation_factor, engine, cfg.workers)
        sink.add(label, [a, b], [cfg.rho1], g.n_samples, cfg.dt, cfg.truncation_factor, None, g.stderr, g.mean, None)
    return extra


def _run_scaling(cfg, sink):
    s = _scenario(cfg, cfg.radius_schedule[0])
    a, b = est.scaling_check(s, cfg.scale, workers=cfg.workers)
    lam = cfg.scale
    for label, pts, radii, dt, g in (
        ("base", cfg.complex_points, s.radii, cfg.dt, a),
        (f"scaled={lam:g}", [lam * z for z in cfg.complex_points], [lam * r for r in s.radii], lam * lam * cfg.dt, b),
    ):
        f = f_radii(s.kappa, config_quantities(pts), radii).value
        sink.add(label, pts, radii, g.n_samples, dt, cfg.truncation_factor, g.mean, g.stderr,
                 g.mean * est._rescale_factor(s.kappa, radii), g.mean / f)
    return {}


def _run_pde(cfg, sink):
    k = kappa_params(cfg.kappa)
    worst = 0.0
    for c in cfg.c_hat_values:
        for z in cfg.complex_points:
            res = pde_residual_1pt(k, c, z, cfg.step)
            rel = abs(res) / green_one_point(k, c, z).value
            worst = max(worst, rel)
            sink.add(f"c_hat={c:g}", [z], [], 0, cfg.step, None, rel, None, None, None)
    return {"max_relative_residual": worst}


def hull_check_values(kappa: float, n_traces: int, t: float, dt: float, n_points: int, seed: int) -> dict[str, float]:
    """Worst ratio (observed / bound) of the hull-map inequalities over sampled traces and points.

    Keys: near_shift (|g - z| / 3 rho), far_shift (|g - z| / 2|z|(rho/|z|)^2),
    far_imag (relative Im change / 4(rho/|z|)^2), far_deriv (|g' - 1| / 5(rho/|z|)^2),
    hcap (|c/(2t) - 1|) and support (1 if U_t lies outside the support estimate).
    """
    k = kappa_params(kappa)
    rng = np.random.default_rng(est.derived_seed(seed, 5))
    worst = {"near_shift": 0.0, "far_shift": 0.0, "far_imag": 0.0, "far_deriv": 0.0, "hcap": 0.0, "support": 0.0}
    for i in range(n_traces):
        path = sample_driving(k, t, dt, est.derived_seed(seed, 100 + i))
        tr = trace_curve(path)
        T = path.duration
        rho = tr.radius()
        done = 0
        while done < n_points:
            s = rng.uniform(0.0, 3.0)
            th = rng.uniform(0.0, math.pi)
            z = rho * s * complex(math.cos(th), math.sin(th))
            st = evolve_point(path, z, T)
            if st.swallowed:
                continue
            worst["near_shift"] = max(worst["near_shift"], abs(st.g - z) / (3.0 * rho))
            done += 1
        for _ in range(n_points):
            s = rng.uniform(5.0, 20.0)
            th = rng.uniform(0.0, math.pi)
            z = rho * s * complex(math.cos(th), math.sin(th))
            st = evolve_point(path, z, T)
            q = (rho / abs(z)) ** 2
            worst["far_shift"] = max(worst["far_shift"], abs(st.g - z) / (2.0 * abs(z) * q))
            if z.imag > 0:
                worst["far_imag"] = max(worst["far_imag"], abs(st.g.imag - z.imag) / z.imag / (4.0 * q))
            worst["far_deriv"] = max(worst["far_deriv"], abs(st.gprime - 1.0) / (5.0 * q))
        c = hcap_estimate(tr, T)
        worst["hcap"] = max(worst["hcap"], abs(c / (2.0 * T) - 1.0))
        lo, hi = hull_support(tr, T)
        if not (lo <= path.u[-1] <= hi):
            worst["support"] = 1.0
    return worst


def _run_hull(cfg, sink):
    vals = hull_check_values(cfg.kappa, cfg.n_traces, cfg.t_max, cfg.dt, cfg.n_test_points, cfg.master_seed)
    for name, v in vals.items():
        sink.add(name, [], [], cfg.n_traces, cfg.dt, None, v, None, None, None)
    return {"worst": vals}


_DISPATCH: dict[ExperimentKind, Callable] = {
    ExperimentKind.ONE_POINT_CONVERGENCE: _run_one_point,
    ExperimentKind.TWO_POINT_BOUNDS: _run_two_point,
    ExperimentKind.MARTINGALE: _run_martingale,
    ExperimentKind.GHAT_CROSSCHECK: _run_ghat,
    ExperimentKind.SCALING: _run_scaling,
    ExperimentKind.PDE_CHECK: _run_pde,
    ExperimentKind.HULL_CHECKS: _run_hull,
}


def _render(cfg: ExperimentConfig, out: Path) -> dict[str, Path]:
    k = kappa_params(cfg.kappa)
    pts = cfg.complex_points
    zmax = max((abs(z) for z in pts), default=1.0)
    t = 2.0 * zmax * zmax
    dt = max(cfg.dt, t / 4000.0)
    traces = [trace_curve(sample_driving(k, t, dt, est.derived_seed(cfg.master_seed, 1000 + i))) for i in range(cfg.render_traces)]
    radii = list(cfg.radius_schedule[-1]) if cfg.radius_schedule else []
    if len(radii) != len(pts):
        radii, pts = [], []
    tj = out / TRACES_JSON
    tj.write_text(json.dumps({"targets": [[z.real, z.imag] for z in pts], "radii": radii,
                              "traces": [tr.to_dict() for tr in traces]}))
    svg = render_traces(traces, pts, radii, out / TRACES_SVG)
    return {"traces_json": tj, "traces_svg": svg}


def run_experiment(cfg: ExperimentConfig, out_dir: Optional[str] = None) -> RunOutcome:
    """Run one experiment; writes results.csv, results.json, summary.json (and traces if asked)."""
    out = cfg.resolved_output_dir(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    sink = _RowSink(cfg)
    extra = _DISPATCH[cfg.experiment](cfg, sink)
    paths = {
        "csv": emit_results(sink.rows, "csv", out / RESULTS_CSV),
        "json": emit_results(sink.rows, "json", out / RESULTS_JSON),
    }
    if cfg.render_traces:
        paths.update(_render(cfg, out))
    summary = {
        "status": "ok",
        "experiment": cfg.experiment.value,
        "experiment_id": cfg.id,
        "config": cfg.to_dict(),
        "n_rows": len(sink.rows),
        "wall_ms_total": 1000.0 * (time.perf_counter() - t0),
        "wall_ms_rows": sink.walls,
        "extra": extra,
    }
    p = out / SUMMARY_JSON
    p.write_text(json.dumps(summary, indent=2, default=str) + "\n")
    paths["summary"] = p
    return RunOutcome(0, sink.rows, paths, summary)
