"""Closed-form quantities for chordal SLE_kappa Green's functions.

Everything here is a pure function of its inputs: exponents (d, alpha), the
comparison kernel P_y(x), configuration geometry (l_k, d_k, y_k, R_k, Q), the
comparison functions F(z; r) and F(z), the one-point Green's function G(z)
and the finite-difference residual of the one-point Green's PDE.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    BoundaryPointError,
    DomainError,
    InvalidArgumentError,
    InvalidConfigurationError,
)

# exponents above this magnitude are evaluated through logarithms
LOG_SPACE_EXPONENT = 50.0


@dataclass(frozen=True)
class Kappa:
    kappa: float
    d: float
    alpha: float

    @property
    def two_minus_d(self) -> float:
        return 2.0 - self.d

    @property
    def interior_exponent(self) -> float:
        """alpha - (2 - d), the exponent of y in P_y(x) on x <= y."""
        return self.alpha - (2.0 - self.d)


def kappa_params(kappa: float) -> Kappa:
    """Return (kappa, d = 1 + kappa/8, alpha = 8/kappa - 1) for kappa in (0, 8)."""
    kappa = float(kappa)
    if not (0.0 < kappa < 8.0) or math.isnan(kappa):
        raise DomainError(f"kappa must lie in (0, 8), got {kappa!r}")
    return Kappa(kappa=kappa, d=1.0 + kappa / 8.0, alpha=8.0 / kappa - 1.0)


def _as_kappa(k: Kappa | float) -> Kappa:
    return k if isinstance(k, Kappa) else kappa_params(k)


def p_y(k: Kappa | float, y, x):
    """Comparison kernel P_y(x).

    ``y**(alpha-(2-d)) * x**(2-d)`` for ``x <= y`` and ``x**alpha`` otherwise.
    Accepts scalars or numpy arrays (broadcast); returns the same kind.
    """
    k = _as_kappa(k)
    scalar = np.ndim(y) == 0 and np.ndim(x) == 0
    y_arr = np.asarray(y, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(y_arr < 0) or np.any(x_arr < 0) or np.any(np.isnan(y_arr)) or np.any(np.isnan(x_arr)):
        raise DomainError("P_y(x) is defined for y >= 0 and x >= 0")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if k.alpha > LOG_SPACE_EXPONENT:
            out = np.exp(_log_p_y(k, y_arr, x_arr))
        else:
            inner = np.power(y_arr, k.interior_exponent) * np.power(x_arr, k.two_minus_d)
            outer = np.power(x_arr, k.alpha)
            out = np.where(x_arr <= y_arr, inner, outer)
    return float(out) if scalar else out


def _log_p_y(k: Kappa, y: np.ndarray, x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = k.interior_exponent * np.log(y) + k.two_minus_d * np.log(x)
        outer = k.alpha * np.log(x)
        # x = 0 (either branch) gives P = 0
        inner = np.where(x == 0, -np.inf, inner)
        outer = np.where(x == 0, -np.inf, outer)
    return np.where(x <= y, inner, outer)


@dataclass(frozen=True)
class PointConfig:
    points: tuple[complex, ...]
    l: tuple[float, ...]
    dmin: tuple[float, ...]
    y: tuple[float, ...]
    R: tuple[float, ...]
    Q: float

    @property
    def n(self) -> int:
        return len(self.points)

    def scaled(self, lam: float) -> "PointConfig":
        return config_quantities([lam * z for z in self.points])

    def permuted(self, order: Sequence[int]) -> "PointConfig":
        return config_quantities([self.points[i] for i in order])


def config_quantities(points: Sequence[complex]) -> PointConfig:
    """Derived geometry of an ordered point tuple, with z_0 = 0 prepended."""
    pts = tuple(complex(z) for z in points)
    if not pts:
        raise InvalidConfigurationError("at least one point is required")
    for z in pts:
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise InvalidConfigurationError(f"non-finite point {z!r}")
        if z.imag < 0:
            raise InvalidConfigurationError(f"point {z!r} is below the real axis")
        if z == 0:
            raise InvalidConfigurationError("a marked point coincides with the origin z_0 = 0")
    if len(set(pts)) != len(pts):
        raise InvalidConfigurationError("marked points must be distinct")
    ext = (0j,) + pts
    n = len(pts)
    l = tuple(min(abs(ext[k] - ext[j]) for j in range(k)) for k in range(1, n + 1))
    dmin = tuple(min(abs(ext[k] - ext[j]) for j in range(n + 1) if j != k) for k in range(1, n + 1))
    y = tuple(z.imag for z in pts)
    R = tuple(min(a, b) for a, b in zip(dmin, y))
    Q = max(abs(z) / dk for z, dk in zip(pts, dmin))
    return PointConfig(points=pts, l=l, dmin=dmin, y=y, R=R, Q=Q)


class GreenKind(enum.Enum):
    F_WITH_RADII = "F_with_radii"
    F_LIMIT = "F_limit"
    G_ONE_POINT = "G_one_point"
    GHAT_ESTIMATE = "Ghat_estimate"


@dataclass(frozen=True)
class GreenValue:
    value: float
    kind: GreenKind

    def __float__(self) -> float:
        return self.value


def _log_ratio(k: Kappa, y: float, num: float, den: float) -> float:
    return float(_log_p_y(k, np.asarray(y), np.asarray(num)) - _log_p_y(k, np.asarray(y), np.asarray(den)))


def f_radii(k: Kappa | float, cfg: PointConfig, radii: Sequence[float]) -> GreenValue:
    """F(z; r) = prod_k P_{y_k}(r_k) / P_{y_k}(l_k)."""
    k = _as_kappa(k)
    radii = [float(r) for r in radii]
    if len(radii) != cfg.n:
        raise InvalidArgumentError(f"expected {cfg.n} radii, got {len(radii)}")
    if any(not (r > 0) or not math.isfinite(r) for r in radii):
        raise InvalidArgumentError("radii must be positive and finite")
    if k.alpha > LOG_SPACE_EXPONENT:
        total = sum(_log_ratio(k, yk, rk, lk) for yk, rk, lk in zip(cfg.y, radii, cfg.l))
        return GreenValue(math.exp(total), GreenKind.F_WITH_RADII)
    value = 1.0
    for yk, rk, lk in zip(cfg.y, radii, cfg.l):
        value *= p_y(k, yk, rk) / p_y(k, yk, lk)
    return GreenValue(value, GreenKind.F_WITH_RADII)


def f_limit(k: Kappa | float, cfg: PointConfig) -> GreenValue:
    """F(z) = prod_k y_k^(alpha-(2-d)) / P_{y_k}(l_k), interior points only."""
    k = _as_kappa(k)
    if any(yk <= 0 for yk in cfg.y):
        raise BoundaryPointError("F(z) is only defined here for interior points (Im z > 0)")
    log_total = 0.0
    for yk, lk in zip(cfg.y, cfg.l):
        log_total += k.interior_exponent * math.log(yk) - float(_log_p_y(k, np.asarray(yk), np.asarray(lk)))
    return GreenValue(math.exp(log_total), GreenKind.F_LIMIT)


def green_one_point(k: Kappa | float, c_hat: float, z: complex) -> GreenValue:
    """G(z) = c_hat * (Im z)^(d-2+alpha) * |z|^(-alpha)."""
    k = _as_kappa(k)
    z = complex(z)
    if not (z.imag > 0):
        raise BoundaryPointError(f"G(z) requires Im z > 0, got {z!r}")
    if not (c_hat > 0):
        raise DomainError("c_hat must be positive")
    log_g = (k.d - 2.0 + k.alpha) * math.log(z.imag) - k.alpha * math.log(abs(z))
    return GreenValue(c_hat * math.exp(log_g), GreenKind.G_ONE_POINT)


def green_one_point_array(k: Kappa, c_hat: float, z: np.ndarray) -> np.ndarray:
    """Vectorized G on an array of points; entries with Im z <= 0 give 0."""
    z = np.asarray(z, dtype=complex)
    y = z.imag
    out = np.zeros(z.shape)
    ok = y > 0
    out[ok] = c_hat * np.exp((k.d - 2.0 + k.alpha) * np.log(y[ok]) - k.alpha * np.log(np.abs(z[ok])))
    return out


def pde_residual_1pt(k: Kappa | float, c_hat: float, z: complex, step: float) -> float:
    """Residual of the one-point Green's PDE with central differences of width ``step``.

    (kappa/2) G_xx + G_x 2x/|z|^2 - G_y 2y/|z|^2 - 2(2-d) G (x^2-y^2)/|z|^4
    """
    k = _as_kappa(k)
    z = complex(z)
    if not (step > 0):
        raise InvalidArgumentError("finite-difference step must be positive")
    if not (z.imag > 0):
        raise BoundaryPointError(f"PDE residual requires Im z > 0, got {z!r}")
    if step >= z.imag:
        raise InvalidArgumentError("step must be smaller than Im z")

    def G(w: complex) -> float:
        return green_one_point(k, c_hat, w).value

    x, y = z.real, z.imag
    h = step
    g0 = G(z)
    gxp, gxm = G(z + h), G(z - h)
    gyp, gym = G(z + 1j * h), G(z - 1j * h)
    g_xx = (gxp - 2.0 * g0 + gxm) / (h * h)
    g_x = (gxp - gxm) / (2.0 * h)
    g_y = (gyp - gym) / (2.0 * h)
    r2 = x * x + y * y
    return (
        0.5 * k.kappa * g_xx
        + g_x * 2.0 * x / r2
        - g_y * 2.0 * y / r2
        - 2.0 * k.two_minus_d * g0 * (x * x - y * y) / (r2 * r2)
    )
