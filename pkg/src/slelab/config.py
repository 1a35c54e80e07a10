"""Strict JSON experiment configuration."""

from __future__ import annotations

import enum
import json
import math
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional

from .errors import SLELabError

OUTPUT_DIR_ENV = "SLELAB_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "results"


class ExperimentKind(enum.Enum):
    ONE_POINT_CONVERGENCE = "one_point_convergence"
    TWO_POINT_BOUNDS = "two_point_bounds"
    MARTINGALE = "martingale"
    GHAT_CROSSCHECK = "ghat_crosscheck"
    SCALING = "scaling"
    PDE_CHECK = "pde_check"
    HULL_CHECKS = "hull_checks"


@dataclass(frozen=True)
class FieldError:
    field: str
    message: str

    def as_dict(self) -> dict:
        return {"field": self.field, "message": self.message}


class ConfigError(SLELabError):
    """A configuration failed validation; ``errors`` lists every offending field."""

    def __init__(self, errors: list[FieldError]):
        self.errors = errors
        super().__init__("; ".join(f"{e.field}: {e.message}" for e in errors))

    def report(self) -> dict:
        return {"status": "invalid-config", "errors": [e.as_dict() for e in self.errors]}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: ExperimentKind
    kappa: float
    points: tuple[tuple[float, float], ...] = ()
    radii: Optional[tuple[float, ...]] = None
    schedule: Optional[tuple[tuple[float, ...], ...]] = None
    n_samples: int = 10_000
    dt: float = 2.5e-5
    truncation_factor: float = 20.0
    c_hat: Optional[float] = None
    master_seed: int = 0
    workers: int = 1
    output_dir: Optional[str] = None
    experiment_id: Optional[str] = None
    # engine
    eta: float = 0.2
    # martingale
    times: tuple[float, ...] = (0.05, 0.1, 0.2)
    guard: float = 0.1
    # ghat_crosscheck
    rho1: float = 0.05
    calibration_radius: Optional[float] = None
    # scaling
    scale: float = 2.0
    # pde_check
    step: float = 1e-4
    c_hat_values: tuple[float, ...] = (1.0,)
    # hull_checks
    n_traces: int = 20
    t_max: float = 1.0
    n_test_points: int = 100
    # optional SVG of a few traced samples
    render_traces: int = 0
    record_timing: bool = False

    @property
    def complex_points(self) -> list[complex]:
        return [complex(a, b) for a, b in self.points]

    @property
    def radius_schedule(self) -> list[tuple[float, ...]]:
        if self.schedule is not None:
            return [tuple(r) for r in self.schedule]
        if self.radii is not None:
            return [tuple(self.radii)]
        return []

    @property
    def id(self) -> str:
        return self.experiment_id or self.experiment.value

    def resolved_output_dir(self, override: Optional[str] = None) -> Path:
        if override:
            return Path(override)
        if self.output_dir:
            return Path(self.output_dir)
        return Path(os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR)

    def with_overrides(self, seed: Optional[int] = None, workers: Optional[int] = None, out: Optional[str] = None):
        cfg = self
        if seed is not None:
            cfg = replace(cfg, master_seed=int(seed))
        if workers is not None:
            cfg = replace(cfg, workers=int(workers))
        if out is not None:
            cfg = replace(cfg, output_dir=str(out))
        validate(cfg)
        return cfg

    def to_dict(self) -> dict:
        out: dict[str, Any] = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, enum.Enum):
                v = v.value
            elif isinstance(v, tuple):
                v = json.loads(json.dumps(v))
            out[f.name] = v
        return out


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}
_REQUIRED = ("experiment", "kappa")


def _num(errors, name, value, *, integer=False) -> Any:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append(FieldError(name, f"expected a number, got {type(value).__name__}"))
        return None
    if integer:
        if isinstance(value, float) and not value.is_integer():
            errors.append(FieldError(name, "expected an integer"))
            return None
        return int(value)
    if not math.isfinite(value):
        errors.append(FieldError(name, "must be finite"))
        return None
    return float(value)


def _num_list(errors, name, value) -> Optional[tuple[float, ...]]:
    if not isinstance(value, list):
        errors.append(FieldError(name, "expected a list of numbers"))
        return None
    out = []
    for i, v in enumerate(value):
        x = _num(errors, f"{name}[{i}]", v)
        if x is None:
            return None
        out.append(x)
    return tuple(out)


def parse_config(data: Any) -> ExperimentConfig:
    """Build and validate a config from a decoded JSON object (unknown keys rejected)."""
    errors: list[FieldError] = []
    if not isinstance(data, dict):
        raise ConfigError([FieldError("<root>", "config must be a JSON object")])
    for key in data:
        if key not in _FIELDS:
            errors.append(FieldError(key, "unknown field"))
    for key in _REQUIRED:
        if key not in data:
            errors.append(FieldError(key, "required field missing"))
    kw: dict[str, Any] = {}
    for key, value in data.items():
        if key not in _FIELDS:
            continue
        if key == "experiment":
            try:
                kw[key] = ExperimentKind(value)
            except ValueError:
                kinds = ", ".join(k.value for k in ExperimentKind)
                errors.append(FieldError(key, f"unknown experiment {value!r}; expected one of {kinds}"))
        elif key == "points":
            pts = []
            if not isinstance(value, list):
                errors.append(FieldError(key, "expected a list of [re, im] pairs"))
                continue
            for i, p in enumerate(value):
                if not (isinstance(p, list) and len(p) == 2):
                    errors.append(FieldError(f"points[{i}]", "expected [re, im]"))
                    continue
                re_, im_ = _num(errors, f"points[{i}][0]", p[0]), _num(errors, f"points[{i}][1]", p[1])
                if re_ is not None and im_ is not None:
                    pts.append((re_, im_))
            kw[key] = tuple(pts)
        elif key in ("radii", "schedule") and value is None:
            kw[key] = None
        elif key in ("radii", "times", "c_hat_values"):
            v = _num_list(errors, key, value)
            if v is not None:
                kw[key] = v
        elif key == "schedule":
            if not isinstance(value, list):
                errors.append(FieldError(key, "expected a list of radius lists"))
                continue
            rows = []
            for i, row in enumerate(value):
                v = _num_list(errors, f"schedule[{i}]", row)
                if v is not None:
                    rows.append(v)
            kw[key] = tuple(rows)
        elif key in ("n_samples", "master_seed", "workers", "n_traces", "n_test_points", "render_traces"):
            v = _num(errors, key, value, integer=True)
            if v is not None:
                kw[key] = v
        elif key in ("output_dir", "experiment_id"):
            if value is not None and not isinstance(value, str):
                errors.append(FieldError(key, "expected a string"))
            else:
                kw[key] = value
        elif key == "record_timing":
            if not isinstance(value, bool):
                errors.append(FieldError(key, "expected true or false"))
            else:
                kw[key] = value
        elif key in ("c_hat", "calibration_radius") and value is None:
            kw[key] = None
        else:
            v = _num(errors, key, value)
            if v is not None:
                kw[key] = v
    if all(key in kw for key in _REQUIRED):
        # report semantic problems alongside the syntactic ones
        cfg = ExperimentConfig(**kw)
        errors.extend(validation_errors(cfg))
    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([FieldError("<root>", f"invalid JSON: {exc}")]) from None
    return parse_config(data)


def validate(cfg: ExperimentConfig) -> None:
    """Check every field against the preconditions of the operations it drives."""
    errors = validation_errors(cfg)
    if errors:
        raise ConfigError(errors)


def validation_errors(cfg: ExperimentConfig) -> list[FieldError]:
    from .sle_math import config_quantities

    errors: list[FieldError] = []
    if not (0.0 < cfg.kappa < 8.0):
        errors.append(FieldError("kappa", f"kappa must lie in (0, 8) (the curve is space filling for kappa >= 8); got {cfg.kappa}"))
    kind = cfg.experiment
    needs_points = kind is not ExperimentKind.HULL_CHECKS
    if needs_points and not cfg.points:
        errors.append(FieldError("points", "at least one point is required"))
    cfg_q = None
    if cfg.points:
        if any(im <= 0 for _, im in cfg.points):
            errors.append(FieldError("points", "points must lie in the open upper half-plane"))
        else:
            try:
                cfg_q = config_quantities(cfg.complex_points)
            except SLELabError as exc:
                errors.append(FieldError("points", str(exc)))
    if cfg.radii is not None and cfg.schedule is not None:
        errors.append(FieldError("radii", "give either radii or schedule, not both"))
    mc_kinds = (
        ExperimentKind.ONE_POINT_CONVERGENCE,
        ExperimentKind.TWO_POINT_BOUNDS,
        ExperimentKind.SCALING,
    )
    if kind in mc_kinds:
        sched = cfg.radius_schedule
        if not sched:
            errors.append(FieldError("schedule", "a radius schedule (or radii) is required"))
        for i, row in enumerate(sched):
            if cfg_q is not None and len(row) != cfg_q.n:
                errors.append(FieldError(f"schedule[{i}]", f"expected {cfg_q.n} radii"))
            elif cfg_q is not None:
                for k, (r, dk) in enumerate(zip(row, cfg_q.dmin)):
                    if not (0 < r < dk):
                        errors.append(FieldError(f"schedule[{i}][{k}]", f"radius must lie in (0, d_k = {dk:g})"))
        for i, (a, b) in enumerate(zip(sched, sched[1:])):
            if any(rb > ra for ra, rb in zip(a, b)):
                errors.append(FieldError(f"schedule[{i + 1}]", "schedule must be decreasing"))
    if kind is ExperimentKind.ONE_POINT_CONVERGENCE and cfg.points and len(cfg.points) != 1:
        errors.append(FieldError("points", "one_point_convergence takes exactly one point"))
    if kind in (ExperimentKind.MARTINGALE,) and cfg.points and len(cfg.points) != 1:
        errors.append(FieldError("points", "martingale takes exactly one point"))
    if kind is ExperimentKind.GHAT_CROSSCHECK:
        if len(cfg.points) != 2:
            errors.append(FieldError("points", "ghat_crosscheck takes exactly two points"))
        elif cfg_q is not None:
            z1, z2 = cfg.complex_points
            if not (0 < cfg.rho1 < min(abs(z1 - z2), abs(z1))):
                errors.append(FieldError("rho1", "rho1 must lie in (0, |z1 - z2| ^ |z1|)"))
            sched = cfg.radius_schedule
            if len(sched) != 1 or len(sched[0]) != 2:
                errors.append(FieldError("radii", "ghat_crosscheck needs radii = [r1, r2]"))
            elif any(not (0 < r < dk) for r, dk in zip(sched[0], cfg_q.dmin)):
                errors.append(FieldError("radii", "radii must lie in (0, d_k)"))
        if cfg.calibration_radius is not None and cfg.points and not (0 < cfg.calibration_radius < cfg.points[0][1]):
            errors.append(FieldError("calibration_radius", "must lie in (0, Im z1)"))
    if cfg.n_samples < 0:
        errors.append(FieldError("n_samples", "must be >= 0"))
    if not (cfg.dt > 0):
        errors.append(FieldError("dt", "must be positive"))
    if not (cfg.truncation_factor >= 2):
        errors.append(FieldError("truncation_factor", "M must be >= 2"))
    if cfg.c_hat is not None and not (cfg.c_hat > 0):
        errors.append(FieldError("c_hat", "must be positive"))
    if cfg.workers < 1:
        errors.append(FieldError("workers", "must be >= 1"))
    if cfg.master_seed < 0 or cfg.master_seed >= 2**64:
        errors.append(FieldError("master_seed", "must lie in [0, 2^64)"))
    if cfg.eta < 0:
        errors.append(FieldError("eta", "must be >= 0"))
    if kind is ExperimentKind.MARTINGALE:
        if any(t < 0 for t in cfg.times) or not cfg.times:
            errors.append(FieldError("times", "need nonnegative times"))
        if not (0 < cfg.guard < 1):
            errors.append(FieldError("guard", "must lie in (0, 1)"))
    if kind is ExperimentKind.SCALING and not (cfg.scale > 0):
        errors.append(FieldError("scale", "must be positive"))
    if kind is ExperimentKind.PDE_CHECK:
        if not (cfg.step > 0):
            errors.append(FieldError("step", "finite-difference step must be positive"))
        elif cfg.points and any(cfg.step >= im for _, im in cfg.points):
            errors.append(FieldError("step", "step must be smaller than every Im z"))
        if not cfg.c_hat_values or any(c <= 0 for c in cfg.c_hat_values):
            errors.append(FieldError("c_hat_values", "need positive values"))
    if kind is ExperimentKind.HULL_CHECKS:
        if cfg.n_traces < 1 or cfg.n_test_points < 1:
            errors.append(FieldError("n_traces", "n_traces and n_test_points must be positive"))
        if not (cfg.t_max > 0) or cfg.dt > cfg.t_max:
            errors.append(FieldError("t_max", "need 0 < dt <= t_max"))
    if cfg.render_traces < 0:
        errors.append(FieldError("render_traces", "must be >= 0"))
    return errors
