"""Discrete chordal Loewner evolution on a uniform time grid.

Each step of length dt shifts the centered map by the driving increment and
applies the vertical-slit map w -> sqrt(w^2 + 4 dt) (half-plane capacity
2 dt).  Curve tips and point evolution compose the same elementary maps, so
the curve and the point flow are exactly consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .errors import DomainError, InvalidArgumentError, SingularInputError
from .sle_math import Kappa, _as_kappa


@dataclass(frozen=True)
class DrivingPath:
    """U_0, U_1, ..., U_N sampled on the grid i*dt."""

    dt: float
    u: np.ndarray = field(repr=False)
    kappa: Kappa
    seed: Optional[int] = None

    def __post_init__(self):
        if not (self.dt > 0) or not math.isfinite(self.dt):
            raise InvalidArgumentError("dt must be positive")
        u = np.asarray(self.u, dtype=float)
        if u.ndim != 1 or u.size < 1:
            raise InvalidArgumentError("driving values must be a nonempty 1-d array")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @property
    def n_steps(self) -> int:
        return self.u.size - 1

    @property
    def duration(self) -> float:
        return self.n_steps * self.dt

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.u)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.u.size)

    def translate(self, c: float) -> "DrivingPath":
        """U + c; the traced hull moves by c and Z_t(z + c) is unchanged."""
        return DrivingPath(self.dt, self.u + float(c), self.kappa, self.seed)

    @classmethod
    def zero(cls, t_max: float, dt: float, kappa: Kappa | float = 8.0 / 3.0) -> "DrivingPath":
        n = _n_steps(t_max, dt)
        return cls(dt, np.zeros(n + 1), _as_kappa(kappa))

    @classmethod
    def from_values(cls, u: Sequence[float], dt: float, kappa: Kappa | float) -> "DrivingPath":
        return cls(dt, np.asarray(u, dtype=float), _as_kappa(kappa))


def _n_steps(t_max: float, dt: float) -> int:
    if not (dt > 0) or not math.isfinite(dt):
        raise InvalidArgumentError("dt must be positive")
    if not (t_max > 0) or not math.isfinite(t_max):
        raise InvalidArgumentError("t_max must be positive")
    if dt > t_max:
        raise InvalidArgumentError("dt must not exceed t_max")
    # guard against 1.0/0.01 = 100.00000000000001 style round-up
    return max(1, math.ceil(t_max / dt - 1e-9))


def sample_driving(k: Kappa | float, t_max: float, dt: float, seed: int) -> DrivingPath:
    """sqrt(kappa) * Brownian motion on ceil(t_max/dt) steps of length dt."""
    k = _as_kappa(k)
    n = _n_steps(t_max, dt)
    rng = np.random.default_rng(seed)
    inc = rng.standard_normal(n) * math.sqrt(k.kappa * dt)
    u = np.concatenate(([0.0], np.cumsum(inc)))
    return DrivingPath(dt, u, k, seed)


@dataclass(frozen=True)
class CurveTrace:
    driving: DrivingPath
    tips: np.ndarray = field(repr=False)

    @property
    def dt(self) -> float:
        return self.driving.dt

    @property
    def n_steps(self) -> int:
        return self.driving.n_steps

    @property
    def step_capacity(self) -> np.ndarray:
        """hcap added by each step (2 dt)."""
        return np.full(self.n_steps, 2.0 * self.dt)

    @property
    def times(self) -> np.ndarray:
        return self.driving.times

    def steps_until(self, t: float) -> int:
        return _steps_until(self.driving, t)

    def radius(self, t: Optional[float] = None) -> float:
        """max |gamma(s)| over grid times s <= t."""
        n = self.n_steps if t is None else self.steps_until(t)
        return float(np.max(np.abs(self.tips[: n + 1])))

    def to_dict(self) -> dict:
        d = self.driving
        return {
            "dt": d.dt,
            "kappa": d.kappa.kappa,
            "seed": d.seed,
            "u": d.u.tolist(),
            "tips": [[z.real, z.imag] for z in self.tips.tolist()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CurveTrace":
        path = DrivingPath(float(data["dt"]), np.asarray(data["u"], float), _as_kappa(data["kappa"]), data.get("seed"))
        if "tips" in data:
            tips = np.array([complex(a, b) for a, b in data["tips"]])
            return cls(path, tips)
        return trace_curve(path)


def _kernel_arrays(path: DrivingPath) -> tuple[np.ndarray, np.ndarray]:
    return np.full(path.n_steps, path.dt), np.ascontiguousarray(path.increments)


def _steps_until(path: DrivingPath, t: float) -> int:
    if t < 0 or not math.isfinite(t):
        raise InvalidArgumentError("t must be finite and nonnegative")
    n = int(math.floor(t / path.dt + 1e-9))
    if n > path.n_steps:
        raise InvalidArgumentError(f"t = {t} exceeds the path duration {path.duration}")
    return n


def trace_curve(path: DrivingPath) -> CurveTrace:
    """Tips gamma(i dt), i = 0..N, by composing inverse slit maps applied to 0."""
    dlt, du = _kernel_arrays(path)
    tips = K.all_tips(dlt, du) + path.u[0]
    tips.setflags(write=False)
    return CurveTrace(path, tips)


@dataclass(frozen=True)
class MapState:
    g: complex
    gprime: complex
    swallowed: bool
    swallow_time: Optional[float]
    centered: complex

    @property
    def Z(self) -> complex:
        return self.centered


def evolve_point(path: DrivingPath, z: complex, t: float) -> MapState:
    """g_t(z), g_t'(z) by composing the forward slit maps up to time t.

    A point closer to the driving value than the slit scale of a step is
    swallowed during that step; the returned state is then the last one
    before swallowing.
    """
    z = complex(z)
    if z.imag < 0:
        raise DomainError("z must lie in the closed upper half-plane")
    n = _steps_until(path, t)
    u0 = path.u[0]
    if z == u0:
        return MapState(z, 1.0 + 0j, True, 0.0, 0j)
    dlt, du = _kernel_arrays(path)
    Z, gp, sw = K.push_forward(dlt, du, n, z - u0)
    if sw >= 0:
        # Z here is the shifted pre-step value; report the state before step sw
        u_prev = path.u[sw]
        zc = Z + du[sw]
        return MapState(zc + u_prev, gp, True, (sw + 1) * path.dt, zc)
    return MapState(Z + path.u[n], gp, False, None, Z)


def centered_map(path: DrivingPath, z: complex, t: float) -> complex:
    """Z_t(z) = g_t(z) - U_t."""
    return evolve_point(path, z, t).centered


def hull_exit_time(trace: CurveTrace, rho: float) -> Optional[float]:
    """First grid time with |gamma(t)| > rho, or None."""
    if not (rho > 0):
        raise InvalidArgumentError("rho must be positive")
    idx = np.flatnonzero(np.abs(trace.tips) > rho)
    if idx.size == 0:
        return None
    return float(idx[0] * trace.dt)


def semidisc_map(x0: float, r: float, z: complex) -> complex:
    """g(z) = z + r^2/(z - x0), the normalized map removing the closed semi-disc."""
    if not (r > 0):
        raise InvalidArgumentError("r must be positive")
    z = complex(z)
    if z == x0:
        raise SingularInputError("semidisc_map is singular at the center x0")
    if z.imag < 0:
        raise DomainError("z must lie in the closed upper half-plane")
    rr = abs(z - x0)
    if rr < r * (1.0 - 1e-12) and z.imag > 0:
        raise DomainError("z lies inside the removed semi-disc")
    return z + r * r / (z - x0)


def semidisc_support(x0: float, r: float) -> tuple[float, float]:
    return (x0 - 2.0 * r, x0 + 2.0 * r)


def hull_footprint(trace: CurveTrace, t: float) -> tuple[float, float]:
    """Real interval [a, b] swallowed by time t (the hull's trace on the real line)."""
    n = trace.steps_until(t)
    u0 = float(trace.driving.u[0])
    if n == 0:
        return (u0, u0)
    dlt, du = _kernel_arrays(trace.driving)
    bound = 4.0 * max(math.sqrt(n * trace.dt), float(np.max(np.abs(trace.driving.u[: n + 1] - u0)))) + 1.0

    def edge(sign: float) -> float:
        inside, outside = 0.0, bound
        if K.real_swallow_step(dlt, du, n, u0 + sign * outside, u0) >= 0:
            return u0 + sign * outside
        for _ in range(60):
            mid = 0.5 * (inside + outside)
            if K.real_swallow_step(dlt, du, n, u0 + sign * mid, u0) >= 0:
                inside = mid
            else:
                outside = mid
            if outside - inside < 1e-13 * bound:
                break
        return u0 + sign * inside

    return (edge(-1.0), edge(1.0))


def hull_support(trace: CurveTrace, t: float, eps: Optional[float] = None) -> tuple[float, float]:
    """Approximate S_{K_t} = [c, d]: images of points just outside the real footprint.

    The bracketing offset defaults to sqrt(dt), so the endpoints carry an
    O(sqrt(dt)) error.
    """
    n = trace.steps_until(t)
    path = trace.driving
    if n == 0:
        u0 = float(path.u[0])
        return (u0, u0)
    if eps is None:
        eps = math.sqrt(path.dt)
    a, b = hull_footprint(trace, t)
    dlt, du = _kernel_arrays(path)
    u0 = float(path.u[0])
    c = K.push_forward_real(dlt, du, n, a - eps - u0) + path.u[n]
    d = K.push_forward_real(dlt, du, n, b + eps - u0) + path.u[n]
    return (float(c), float(d))


def first_hits(trace: CurveTrace, targets: Sequence[complex], radii: Sequence[float]) -> list[Optional[float]]:
    """First grid time at which the tip polyline comes within r_k of z_k (None if never)."""
    targets = [complex(z) for z in targets]
    radii = [float(r) for r in radii]
    if len(targets) != len(radii):
        raise InvalidArgumentError("targets and radii must have the same length")
    if any(not (r > 0) for r in radii):
        raise InvalidArgumentError("radii must be positive")
    tips = np.asarray(trace.tips)
    out: list[Optional[float]] = []
    for z, r in zip(targets, radii):
        if abs(tips[0] - z) <= r:
            out.append(0.0)
            continue
        d = _segment_distances(tips, z)
        idx = np.flatnonzero(d <= r)
        out.append(None if idx.size == 0 else float((idx[0] + 1) * trace.dt))
    return out


def _segment_distances(tips: np.ndarray, z: complex) -> np.ndarray:
    """Distance from z to each segment [tips[i], tips[i+1]]."""
    a = tips[:-1]
    ab = tips[1:] - a
    az = z - a
    L2 = ab.real**2 + ab.imag**2
    with np.errstate(invalid="ignore", divide="ignore"):
        s = (az.real * ab.real + az.imag * ab.imag) / L2
    s = np.where(L2 > 0, np.clip(s, 0.0, 1.0), 0.0)
    return np.abs(z - (a + s * ab))


def hcap_estimate(trace: CurveTrace, t: float, height: Optional[float] = None) -> float:
    """Hydrodynamic coefficient c in g_t(iY) = iY + c/(iY) + ...

    Uses Re[(g_t(iY) - iY) iY], whose first correction is O(rad^2/Y^2)
    relative; Y defaults to 100 times the hull radius.
    """
    n = trace.steps_until(t)
    path = trace.driving
    if height is None:
        height = 100.0 * max(trace.radius(t), math.sqrt(path.dt))
    z = path.u[0] + 1j * height
    st = evolve_point(path, z, n * path.dt)
    if st.swallowed:
        raise DomainError("reference point was swallowed; increase height")
    return float(((st.g - z) * (1j * height)).real)
