"""Monte Carlo estimation of SLE visit probabilities and Green's functions.

All estimates run through one compiled kernel that evolves the marked
points with an adaptive step (dt_k = eta^2 min_k |Z_k|^2, floored at the
scenario's dt), traces the tip only while a disc or the exit circle can be
reached, and records first hits for every radius level in the same run.
Sample i of every run draws its Brownian increments from a stream seeded by
mix(master_seed, i), so results do not depend on how samples are split
between workers, and all radius levels of one run share their paths.
"""

from __future__ import annotations

import itertools
import math
import multiprocessing as mp
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .errors import CalibrationError, InvalidArgumentError, PreconditionError
from .loewner import DrivingPath, evolve_point, first_hits, trace_curve
from .sle_math import Kappa, PointConfig, _as_kappa, config_quantities, f_radii, p_y


class LowSampleWarning(UserWarning):
    """An estimate rests on zero (or very few) hits."""


@dataclass(frozen=True)
class EngineSettings:
    """Knobs of the adaptive Monte Carlo kernel.

    eta: relative step size; a step is eta^2 * min_k |Z_t(z_k)|^2 long, floored at dt.
    dt_max: ceiling on the step length.
    max_steps: per-sample step budget (samples hitting it are reported).
    refine: split steps whose tip jump is large next to an undecided disc.
    chunk: samples per kernel call (the unit of work handed to a worker).
    """

    eta: float = 0.2
    dt_max: float = math.inf
    max_steps: int = 200_000
    refine: bool = True
    chunk: int = 4096

    def __post_init__(self):
        if self.eta < 0 or not math.isfinite(self.eta):
            raise InvalidArgumentError("eta must be finite and >= 0")
        if not (self.dt_max > 0):
            raise InvalidArgumentError("dt_max must be positive")
        if self.max_steps < 1 or self.chunk < 1:
            raise InvalidArgumentError("max_steps and chunk must be positive")


UNIFORM = EngineSettings(eta=0.0)


@dataclass
class SimResult:
    hit_t: np.ndarray  # (N, L, n)
    exit_t: np.ndarray  # (N, E)
    swallow_t: np.ndarray  # (N, n)
    diag: np.ndarray  # (N, 4): steps, tips, refinements, status
    hit_Z: Optional[np.ndarray] = None  # (N, L, n, n)
    hit_gp: Optional[np.ndarray] = None
    rec_Z: Optional[np.ndarray] = None  # (N, T, n)
    rec_gp: Optional[np.ndarray] = None

    @property
    def n_samples(self) -> int:
        return self.hit_t.shape[0]

    @property
    def step_limited(self) -> int:
        return int(np.count_nonzero(self.diag[:, 3] == K.ST_STEP_LIMIT))


def _run_chunk(args) -> SimResult:
    (master, start, count, kappa, targets, radii, exits, t_max, dt, st, rec, keep) = args
    n = targets.size
    L = radii.shape[0]
    E = exits.size
    T = rec.size
    hit_t = np.empty((count, L, n))
    hit_Z = np.empty((count, L, n, n), complex)
    hit_gp = np.empty((count, L, n, n), complex)
    exit_t = np.empty((count, E))
    rec_Z = np.empty((count, T, n), complex)
    rec_gp = np.empty((count, T, n), complex)
    sw = np.empty((count, n))
    diag = np.empty((count, 4))
    K.simulate_batch(
        np.uint64(master), start, count, kappa, targets, radii, exits, t_max, dt, st.eta, st.dt_max,
        rec, st.max_steps, st.refine, hit_t, hit_Z, hit_gp, exit_t, rec_Z, rec_gp, sw, diag,
    )
    if not keep:
        return SimResult(hit_t, exit_t, sw, diag)
    return SimResult(hit_t, exit_t, sw, diag, hit_Z, hit_gp, rec_Z if T else None, rec_gp if T else None)


def _concat(parts: list[SimResult]) -> SimResult:
    def cat(name):
        vals = [getattr(p, name) for p in parts]
        if vals[0] is None:
            return None
        return np.concatenate(vals, axis=0)

    return SimResult(*(cat(f) for f in ("hit_t", "exit_t", "swallow_t", "diag", "hit_Z", "hit_gp", "rec_Z", "rec_gp")))


def simulate(
    kappa: Kappa | float,
    targets: Sequence[complex],
    radii_levels,
    exit_radii: Sequence[float],
    n_samples: int,
    dt: float,
    master_seed: int,
    settings: EngineSettings = EngineSettings(),
    record_times: Sequence[float] = (),
    keep_states: bool = False,
    workers: int = 1,
    t_max: Optional[float] = None,
) -> SimResult:
    """Run n_samples SLE samples against every radius level at once.

    radii_levels[l][k] is the radius of disc k at level l (<= 0 marks a passive
    point that is evolved but never targeted).  Samples stop once every disc is
    decided, once the largest exit circle is crossed, or at t_max, which
    defaults to (max exit radius)^2 / 2 -- by then the hull has left that circle,
    since a hull inside a radius-rho semi-disc has capacity at most rho^2.
    """
    k = _as_kappa(kappa)
    tg = np.ascontiguousarray(np.asarray(targets, dtype=complex).ravel())
    radii = np.ascontiguousarray(np.atleast_2d(np.asarray(radii_levels, dtype=float)))
    exits = np.ascontiguousarray(np.asarray(exit_radii, dtype=float).ravel())
    rec = np.ascontiguousarray(np.sort(np.asarray(record_times, dtype=float).ravel()))
    if radii.shape[1] != tg.size:
        raise InvalidArgumentError("radius levels must have one entry per target")
    if exits.size == 0:
        exits = np.array([np.inf])
    if not (dt > 0):
        raise InvalidArgumentError("dt must be positive")
    if n_samples < 0:
        raise InvalidArgumentError("n_samples must be >= 0")
    if workers < 1:
        raise InvalidArgumentError("workers must be >= 1")
    if t_max is None:
        t_max = float(np.max(exits)) ** 2 / 2.0
        if rec.size:
            t_max = max(t_max, float(rec[-1])) if math.isfinite(t_max) else float(rec[-1])
    if not math.isfinite(t_max):
        raise InvalidArgumentError("a finite horizon (exit radius, record time or t_max) is required")
    chunks = [
        (int(master_seed), s, min(settings.chunk, n_samples - s), k.kappa, tg, radii, exits, float(t_max), float(dt),
         settings, rec, keep_states)
        for s in range(0, n_samples, settings.chunk)
    ]
    if not chunks:
        chunks = [(int(master_seed), 0, 0, k.kappa, tg, radii, exits, float(t_max), float(dt), settings, rec, keep_states)]
    if workers == 1 or len(chunks) == 1:
        parts = [_run_chunk(c) for c in chunks]
    else:
        with mp.get_context("fork").Pool(workers) as pool:
            # imap keeps chunk order, so the merge is by ascending sample index
            parts = list(pool.imap(_run_chunk, chunks))
    res = _concat(parts)
    if res.step_limited:
        warnings.warn(f"{res.step_limited} samples hit the step budget of {settings.max_steps}", RuntimeWarning)
    return res


# ---------------------------------------------------------------------------
# scenarios and estimates


@dataclass(frozen=True)
class Scenario:
    kappa: Kappa
    config: PointConfig
    radii: tuple[float, ...]
    n_samples: int
    dt: float = 2.5e-5
    truncation_factor: float = 20.0
    master_seed: int = 0
    engine: EngineSettings = field(default_factory=EngineSettings)

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        object.__setattr__(self, "radii", radii)
        _check_radii(self.config, radii)
        if not (self.truncation_factor >= 2):
            raise PreconditionError("truncation factor M must be >= 2")
        if self.n_samples < 0:
            raise PreconditionError("n_samples must be >= 0")
        if not (self.dt > 0):
            raise PreconditionError("dt must be positive")
        if any(yk <= 0 for yk in self.config.y):
            raise PreconditionError("Monte Carlo scenarios need interior points (Im z > 0)")

    @classmethod
    def make(cls, kappa, points, radii, n_samples, **kw) -> "Scenario":
        return cls(_as_kappa(kappa), config_quantities(points), tuple(radii), int(n_samples), **kw)

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def exit_radius(self) -> float:
        return self.truncation_factor * max(abs(z) for z in self.config.points)

    def with_radii(self, radii) -> "Scenario":
        return replace(self, radii=tuple(radii))


def _check_radii(cfg: PointConfig, radii: Sequence[float]) -> None:
    if len(radii) != cfg.n:
        raise PreconditionError(f"expected {cfg.n} radii, got {len(radii)}")
    for k, (r, dk) in enumerate(zip(radii, cfg.dmin)):
        if not (0 < r < dk):
            raise PreconditionError(f"radius r_{k + 1} = {r} must lie in (0, d_{k + 1} = {dk})")


@dataclass(frozen=True)
class GreenEstimate:
    mean: float
    stderr: float
    n_samples: int
    n_hits: int
    truncation_factor: float
    rescaled: bool
    scale: float = 1.0  # factor applied to the raw estimate
    defined: bool = True  # False when there are no samples (mean is then NaN)

    @property
    def raw_mean(self) -> float:
        return self.mean / self.scale

    @property
    def raw_stderr(self) -> float:
        return self.stderr / self.scale

    def rescale(self, factor: float) -> "GreenEstimate":
        return replace(self, mean=self.mean * factor, stderr=self.stderr * factor, rescaled=True, scale=self.scale * factor)


def binomial_estimate(hits: int, n: int, truncation_factor: float) -> GreenEstimate:
    if n == 0:
        return GreenEstimate(math.nan, math.nan, 0, 0, truncation_factor, False, defined=False)
    p = hits / n
    return GreenEstimate(p, math.sqrt(p * (1.0 - p) / n), n, int(hits), truncation_factor, False)


def mean_estimate(values: np.ndarray, truncation_factor: float) -> GreenEstimate:
    n = values.size
    if n == 0:
        return GreenEstimate(math.nan, math.nan, 0, 0, truncation_factor, False, defined=False)
    sd = float(np.std(values, ddof=1)) if n > 1 else math.inf
    return GreenEstimate(float(np.mean(values)), sd / math.sqrt(n), n, int(np.count_nonzero(values)), truncation_factor, False)


def combined_stderr(*ests: GreenEstimate) -> float:
    return math.sqrt(sum(e.stderr**2 for e in ests))


@dataclass(frozen=True)
class OrderedHitRecord:
    permutation: tuple[int, ...]
    hit_times: tuple[float, ...]
    all_hit: bool


def _rescale_factor(k: Kappa, radii: Sequence[float]) -> float:
    return math.prod(r ** (k.d - 2.0) for r in radii)


def run_scenario(s: Scenario, levels, exit_factors=(None,), workers: int = 1, keep_states=False) -> SimResult:
    """Simulate a scenario against several radius levels and exit circles at once.

    exit_factors are truncation factors M (None = the scenario's own); the
    exit radius is M * max|z_k|.  All levels and exits share the same paths.
    """
    zmax = max(abs(z) for z in s.config.points)
    exits = [s.exit_radius if f is None else f * zmax for f in exit_factors]
    return simulate(
        s.kappa, s.config.points, levels, exits, s.n_samples, s.dt, s.master_seed, s.engine,
        keep_states=keep_states, workers=workers,
    )


def _all_hit(sim: SimResult, level: int = 0, exit_index: int = 0) -> np.ndarray:
    """Per-sample flag: every disc of the level was reached before the exit circle."""
    h = sim.hit_t[:, level, :]
    ex = sim.exit_t[:, exit_index][:, None]
    return np.all(h < ex, axis=1)


def hit_records(sim: SimResult, level: int = 0, exit_index: int = 0) -> list[OrderedHitRecord]:
    """Per-sample visit order; ties (discs first reached in the same step) break by index."""
    out = []
    valid = _all_hit(sim, level, exit_index)
    for i in range(sim.n_samples):
        h = sim.hit_t[i, level, :]
        perm = tuple(int(j) for j in np.argsort(h, kind="stable"))
        out.append(OrderedHitRecord(perm, tuple(float(h[j]) for j in perm), bool(valid[i])))
    return out


def _ordered_counts(sim: SimResult, level: int = 0, exit_index: int = 0) -> dict[tuple[int, ...], int]:
    n = sim.hit_t.shape[2]
    valid = _all_hit(sim, level, exit_index)
    counts = {perm: 0 for perm in itertools.permutations(range(n))}
    if np.any(valid):
        order = np.argsort(sim.hit_t[valid, level, :], axis=1, kind="stable")
        keys, num = np.unique(order, axis=0, return_counts=True)
        for key, c in zip(keys, num):
            counts[tuple(int(j) for j in key)] = int(c)
    return counts


def estimate_visit_prob(
    s: Scenario,
    workers: int = 1,
    sim: Optional[SimResult] = None,
    level: int = 0,
    exit_index: int = 0,
    truncation_factor: Optional[float] = None,
) -> tuple[GreenEstimate, dict[tuple[int, ...], GreenEstimate]]:
    """Unordered P[all discs reached before exit] and its split by visit order.

    Every all-hit sample falls in exactly one permutation cell, so the ordered
    hit counts sum to the unordered count.  With a precomputed ``sim`` the
    estimate is read off its ``level`` / ``exit_index`` slice.
    """
    if sim is None:
        sim = run_scenario(s, [s.radii], workers=workers)
    N = sim.n_samples
    M = s.truncation_factor if truncation_factor is None else truncation_factor
    hits = int(np.count_nonzero(_all_hit(sim, level, exit_index)))
    unordered = binomial_estimate(hits, N, M)
    per_perm = {perm: binomial_estimate(c, N, M) for perm, c in _ordered_counts(sim, level, exit_index).items()}
    return unordered, per_perm


def partition_identity_holds(unordered: GreenEstimate, per_perm: dict) -> bool:
    return unordered.n_hits == sum(e.n_hits for e in per_perm.values())


def rescaled_green(s: Scenario, workers: int = 1) -> GreenEstimate:
    """prod r_k^(d-2) * P[all discs reached]."""
    est, _ = estimate_visit_prob(s, workers)
    return est.rescale(_rescale_factor(s.kappa, s.radii))


def convergence_sweep(s: Scenario, radii_schedule, workers: int = 1, exit_factors=(None,)) -> list[GreenEstimate]:
    """Rescaled estimates along a decreasing radius schedule, all levels from the same paths.

    With several exit factors the result is a list per factor (outer index = factor).
    """
    schedule = [tuple(float(r) for r in entry) for entry in radii_schedule]
    if not schedule:
        raise InvalidArgumentError("radius schedule is empty")
    for entry in schedule:
        _check_radii(s.config, entry)
    for a, b in zip(schedule, schedule[1:]):
        if any(rb > ra for ra, rb in zip(a, b)):
            raise InvalidArgumentError("radius schedule must be decreasing")
    sim = run_scenario(s, schedule, exit_factors, workers)
    tables = []
    for e in range(len(exit_factors)):
        M = s.truncation_factor if exit_factors[e] is None else exit_factors[e]
        row = []
        for l, entry in enumerate(schedule):
            hits = int(np.count_nonzero(_all_hit(sim, l, e)))
            row.append(binomial_estimate(hits, sim.n_samples, M).rescale(_rescale_factor(s.kappa, entry)))
        tables.append(row)
    return tables[0] if len(exit_factors) == 1 else tables


def ratio_to_f(est: GreenEstimate, s: Scenario) -> float:
    """Raw probability divided by F(z; r)."""
    f = f_radii(s.kappa, s.config, s.radii).value
    return est.raw_mean / f


def bound_ratio(s: Scenario, workers: int = 1) -> float:
    """P-hat / F(z; r); zero hits give 0 with a LowSampleWarning."""
    est, _ = estimate_visit_prob(s, workers)
    if est.n_hits == 0:
        warnings.warn("bound_ratio: no sample reached all discs; ratio reported as 0", LowSampleWarning)
        return 0.0
    return ratio_to_f(est, s)


def truncation_pair(s: Scenario, workers: int = 1, factors=(None, None)) -> tuple[GreenEstimate, GreenEstimate]:
    """Raw estimates at truncation M and 2M from the same paths."""
    M = s.truncation_factor
    exit_factors = (M, 2.0 * M) if factors == (None, None) else factors
    sim = run_scenario(s, [s.radii], exit_factors, workers)
    out = []
    for e, f in enumerate(exit_factors):
        out.append(binomial_estimate(int(np.count_nonzero(_all_hit(sim, 0, e))), sim.n_samples, f))
    return out[0], out[1]


def one_point_comparison(s: Scenario, workers: int = 1) -> float:
    """P-hat[dist(z, curve) <= r] / (P_y(r) / P_y(|z|)) for a single point."""
    if s.n != 1:
        raise InvalidArgumentError("one-point comparison needs a single point")
    z = s.config.points[0]
    est, _ = estimate_visit_prob(s, workers)
    return est.mean / (p_y(s.kappa, z.imag, s.radii[0]) / p_y(s.kappa, z.imag, abs(z)))


def _one_point_shape(k: Kappa, z: complex) -> float:
    """G(z) / c_hat."""
    return math.exp((k.d - 2.0 + k.alpha) * math.log(z.imag) - k.alpha * math.log(abs(z)))


def calibrate_c_hat_estimate(
    k: Kappa | float,
    z: complex,
    r: float,
    n: int,
    dt: float,
    seed: int,
    truncation_factor: float = 20.0,
    settings: EngineSettings = EngineSettings(),
    workers: int = 1,
) -> GreenEstimate:
    """c_hat = r^(d-2) P-hat / (y^(d-2+alpha) |z|^-alpha), with its standard error."""
    k = _as_kappa(k)
    z = complex(z)
    if not (z.imag > 0):
        raise PreconditionError("calibration needs Im z > 0")
    if not (0 < r < z.imag):
        raise PreconditionError("calibration radius must lie in (0, Im z)")
    s = Scenario(k, config_quantities([z]), (r,), n, dt, truncation_factor, seed, settings)
    est = rescaled_green(s, workers)
    if est.n_hits == 0:
        raise CalibrationError(f"no sample came within r = {r} of z = {z}; cannot calibrate c_hat")
    return est.rescale(1.0 / _one_point_shape(k, z))


def calibrate_c_hat(k, z, r, n, dt, seed, **kw) -> float:
    return calibrate_c_hat_estimate(k, z, r, n, dt, seed, **kw).mean


# ---------------------------------------------------------------------------
# martingale weights


def _log_m(k: Kappa, Z: np.ndarray, gp: np.ndarray) -> np.ndarray:
    """log(M / c_hat) with M = |g'|^(2-d) G(Z); -inf where Im Z <= 0."""
    Z = np.asarray(Z, complex)
    y = Z.imag
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (
            (2.0 - k.d) * np.log(np.abs(gp))
            + (k.d - 2.0 + k.alpha) * np.log(y)
            - k.alpha * np.log(np.abs(Z))
        )
    return np.where(y > 0, out, -np.inf)


def rn_weight(
    path: DrivingPath, z: complex, stop_radius: float, k: Kappa | float, c_hat: float = 1.0
) -> float:
    """M^z_tau / G(z) at tau = first time the traced curve comes within stop_radius of z.

    Returns 0 when the curve does not get that close during the path.  c_hat
    cancels in the ratio and is accepted only for interface symmetry.
    """
    k = _as_kappa(k)
    z = complex(z)
    if not (z.imag > 0):
        raise PreconditionError("rn_weight needs Im z > 0")
    if not (0 < stop_radius < abs(z - path.u[0])):
        raise PreconditionError("stop_radius must lie in (0, |z|)")
    if not (c_hat > 0):
        raise PreconditionError("c_hat must be positive")
    trace = trace_curve(path)
    (tau,) = first_hits(trace, [z], [stop_radius])
    if tau is None:
        return 0.0
    st = evolve_point(path, z, tau)
    # if z was swallowed first, st holds the last pre-swallow state
    num = _log_m(k, np.array([st.centered]), np.array([st.gprime]))[0]
    den = _log_m(k, np.array([z - path.u[0]]), np.array([1.0]))[0]
    return float(math.exp(num - den))


def martingale_estimates(
    k: Kappa | float,
    z: complex,
    times: Sequence[float],
    n: int,
    dt: float,
    seed: int,
    guard: float = 0.1,
    settings: EngineSettings = UNIFORM,
    workers: int = 1,
) -> list[GreenEstimate]:
    """E-hat[M_{t ^ tau}] / M_0 for each t, tau = first time dist(z, curve) < guard * Im z."""
    k = _as_kappa(k)
    z = complex(z)
    if not (z.imag > 0):
        raise PreconditionError("martingale test needs Im z > 0")
    times = [float(t) for t in times]
    if any(t < 0 for t in times):
        raise InvalidArgumentError("times must be nonnegative")
    out: list[Optional[GreenEstimate]] = [None] * len(times)
    positive = sorted({t for t in times if t > 0})
    for i, t in enumerate(times):
        if t == 0:
            out[i] = GreenEstimate(1.0, 0.0, n, n, math.inf, False)
    if positive:
        sim = simulate(
            k, [z], [[guard * z.imag]], [np.inf], n, dt, seed, settings,
            record_times=positive, keep_states=True, workers=workers, t_max=max(positive),
        )
        log_m0 = _log_m(k, np.array([z]), np.array([1.0]))[0]
        tau = sim.hit_t[:, 0, 0]
        stopped = np.isfinite(tau)
        m_tau = np.zeros(sim.n_samples)
        m_tau[stopped] = np.exp(_log_m(k, sim.hit_Z[stopped, 0, 0, 0], sim.hit_gp[stopped, 0, 0, 0]) - log_m0)
        for j, t in enumerate(positive):
            m_t = np.exp(_log_m(k, sim.rec_Z[:, j, 0], sim.rec_gp[:, j, 0]) - log_m0)
            vals = np.where(tau <= t * (1.0 + 1e-12), m_tau, m_t)
            if np.any(np.isnan(vals)):
                raise RuntimeError("martingale test: missing state for some samples")
            est = mean_estimate(vals, math.inf)
            for i, ti in enumerate(times):
                if ti == t:
                    out[i] = est
    return out  # type: ignore[return-value]


def martingale_test(k, c_hat: float, z, times, n, dt, seed, **kw) -> list[float]:
    """Ratios E-hat[M_{t ^ tau}] / M_0; c_hat cancels."""
    if not (c_hat > 0):
        raise PreconditionError("c_hat must be positive")
    return [e.mean for e in martingale_estimates(k, z, times, n, dt, seed, **kw)]


def ghat_two_point(
    k: Kappa | float,
    c_hat: float,
    z1: complex,
    z2: complex,
    rho1: float,
    n: int,
    dt: float,
    seed: int,
    truncation_factor: float = 20.0,
    settings: EngineSettings = EngineSettings(),
    workers: int = 1,
) -> GreenEstimate:
    """Importance-sampled ordered Green's function G-hat(z1, z2).

    Mean over samples of M^{z1}_tau * |g_tau'(z2)|^(2-d) G(Z_tau(z2)) with tau the
    first time the curve is within rho1 of z1 (before leaving the truncation
    circle); samples that never get there, or that swallow z2 first, give 0.
    """
    k = _as_kappa(k)
    z1, z2 = complex(z1), complex(z2)
    if z1 == z2:
        raise PreconditionError("z1 and z2 must differ")
    if not (z1.imag > 0 and z2.imag > 0):
        raise PreconditionError("G-hat needs interior points")
    if not (0 < rho1 < min(abs(z1 - z2), abs(z1))):
        raise PreconditionError("rho1 must lie in (0, |z1 - z2| ^ |z1|)")
    if not (c_hat > 0):
        raise PreconditionError("c_hat must be positive")
    exit_r = truncation_factor * max(abs(z1), abs(z2))
    sim = simulate(k, [z1, z2], [[rho1, 0.0]], [exit_r], n, dt, seed, settings, keep_states=True, workers=workers)
    tau = sim.hit_t[:, 0, 0]
    ok = (tau < sim.exit_t[:, 0]) & (sim.swallow_t[:, 1] > tau)
    vals = np.zeros(sim.n_samples)
    if np.any(ok):
        lm1 = _log_m(k, sim.hit_Z[ok, 0, 0, 0], sim.hit_gp[ok, 0, 0, 0])
        lm2 = _log_m(k, sim.hit_Z[ok, 0, 0, 1], sim.hit_gp[ok, 0, 0, 1])
        vals[ok] = c_hat * c_hat * np.exp(lm1 + lm2)
    return mean_estimate(vals, truncation_factor)


def scaling_check(s: Scenario, lam: float, workers: int = 1) -> tuple[GreenEstimate, GreenEstimate]:
    """Raw estimates for (z, r) and (lam z, lam r), with independent seeds.

    The scaled arm runs with step lam^2 dt, so the discrete scheme itself is
    exactly scale covariant and the two arms agree in law.
    """
    if not (lam > 0):
        raise InvalidArgumentError("lambda must be positive")
    scaled = Scenario(
        s.kappa,
        s.config.scaled(lam),
        tuple(lam * r for r in s.radii),
        s.n_samples,
        lam * lam * s.dt,
        s.truncation_factor,
        derived_seed(s.master_seed, 1),
        s.engine,
    )
    a, _ = estimate_visit_prob(s, workers)
    b, _ = estimate_visit_prob(scaled, workers)
    return a, b


def derived_seed(master: int, stream: int) -> int:
    """Independent master seed for an auxiliary stream of the same experiment."""
    return int(K.splitmix64(np.uint64(master) ^ K.splitmix64(np.uint64(stream))))
