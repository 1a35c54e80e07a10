"""Result rows (CSV / JSON) and SVG rendering of traced curves."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError

COLUMNS = (
    "experiment_id",
    "kappa",
    "n_points",
    "points",
    "radii",
    "n_samples",
    "dt",
    "truncation_factor",
    "seed",
    "raw_p",
    "stderr",
    "rescaled",
    "ratio_to_F",
    "wall_ms",
)
SIG_DIGITS = 12


def fmt_num(x: Optional[float]) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{SIG_DIGITS}g}"


def _round(x: Optional[float]) -> Optional[float]:
    if x is None:
        return None
    x = float(x)
    return x if not math.isfinite(x) else float(f"{x:.{SIG_DIGITS}g}")


def fmt_points(points: Sequence[complex]) -> str:
    return ";".join(f"{fmt_num(complex(z).real)}:{fmt_num(complex(z).imag)}" for z in points)


def fmt_list(values: Sequence[float]) -> str:
    return ";".join(fmt_num(v) for v in values)


@dataclass(frozen=True)
class ResultRow:
    """One line of results; floats are held at 12 significant digits so rows round-trip exactly."""

    experiment_id: str
    kappa: float
    n_points: int
    points: str
    radii: str
    n_samples: int
    dt: Optional[float]
    truncation_factor: Optional[float]
    seed: int
    raw_p: Optional[float]
    stderr: Optional[float]
    rescaled: Optional[float]
    ratio_to_F: Optional[float]
    wall_ms: Optional[float] = None

    def __post_init__(self):
        for name in ("kappa", "dt", "truncation_factor", "raw_p", "stderr", "rescaled", "ratio_to_F", "wall_ms"):
            object.__setattr__(self, name, _round(getattr(self, name)))
        object.__setattr__(self, "n_points", int(self.n_points))
        object.__setattr__(self, "n_samples", int(self.n_samples))
        object.__setattr__(self, "seed", int(self.seed))

    def cells(self) -> list[str]:
        out = []
        for name in COLUMNS:
            v = getattr(self, name)
            out.append(v if isinstance(v, str) else fmt_num(v))
        return out

    def as_dict(self) -> dict:
        return asdict(self)


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return fmt_num(v)
    return v


def rows_to_json(rows: Sequence[ResultRow]) -> str:
    payload = {"columns": list(COLUMNS), "rows": [{k: _json_value(v) for k, v in r.as_dict().items()} for r in rows]}
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def rows_from_json(text: str) -> list[ResultRow]:
    data = json.loads(text)
    out = []
    for d in data["rows"]:
        kw = {}
        for f in fields(ResultRow):
            v = d.get(f.name)
            if isinstance(v, str) and f.name not in ("experiment_id", "points", "radii"):
                v = float(v)
            kw[f.name] = v
        out.append(ResultRow(**kw))
    return out


def rows_from_csv(text: str) -> list[ResultRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != COLUMNS:
        raise InvalidArgumentError("unexpected CSV header")
    out = []
    for cells in reader:
        kw = {}
        for name, cell in zip(COLUMNS, cells):
            if name in ("experiment_id", "points", "radii"):
                kw[name] = cell
            elif name in ("n_points", "n_samples", "seed"):
                kw[name] = int(cell)
            else:
                kw[name] = None if cell == "" else float(cell)
        out.append(ResultRow(**kw))
    return out


def emit_results(rows: Sequence[ResultRow], fmt: str, path: str | Path) -> Path:
    """Write rows as CSV (fixed column order) or JSON (same schema)."""
    path = Path(path)
    if fmt == "csv":
        text = rows_to_csv(rows)
    elif fmt == "json":
        text = rows_to_json(rows)
    else:
        raise InvalidArgumentError(f"unknown format {fmt!r}; expected 'csv' or 'json'")
    path.write_text(text)
    return path


# ---------------------------------------------------------------------------
# SVG


def render_traces(
    traces,
    targets: Sequence[complex],
    radii: Sequence[float],
    path: str | Path,
    max_points: int = 2000,
    size: int = 800,
) -> Path:
    """Polyline per trace and a circle per target disc, auto-fit with a 10% margin.

    Traces longer than ``max_points`` are decimated (the last tip is kept).
    """
    traces = list(traces)
    if not traces:
        raise InvalidArgumentError("render_traces needs at least one trace")
    if len(targets) != len(radii):
        raise InvalidArgumentError("targets and radii must have the same length")
    if max_points < 2:
        raise InvalidArgumentError("max_points must be >= 2")
    polys = []
    for tr in traces:
        tips = np.asarray(getattr(tr, "tips", tr), dtype=complex)
        if tips.size > max_points:
            idx = np.unique(np.concatenate((np.linspace(0, tips.size - 1, max_points).round().astype(int), [tips.size - 1])))
            tips = tips[idx]
        polys.append(tips)
    xs = np.concatenate([p.real for p in polys] + [np.array([complex(z).real - r, complex(z).real + r]) for z, r in zip(targets, radii)])
    ys = np.concatenate([p.imag for p in polys] + [np.array([complex(z).imag - r, complex(z).imag + r]) for z, r in zip(targets, radii)])
    x0, x1, y0, y1 = float(xs.min()), float(xs.max()), float(ys.min()), float(ys.max())
    w = max(x1 - x0, 1e-9)
    h = max(y1 - y0, 1e-9)
    x0, x1 = x0 - 0.1 * w, x1 + 0.1 * w
    y0, y1 = y0 - 0.1 * h, y1 + 0.1 * h
    w, h = x1 - x0, y1 - y0
    stroke = fmt_num(0.002 * max(w, h))
    # flip y so the upper half-plane is drawn upwards
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{int(round(size * h / w)) if w else size}" '
        f'viewBox="{fmt_num(x0)} {fmt_num(-y1)} {fmt_num(w)} {fmt_num(h)}">',
        f'<line x1="{fmt_num(x0)}" y1="0" x2="{fmt_num(x1)}" y2="0" stroke="#999" stroke-width="{stroke}"/>',
    ]
    for p in polys:
        pts = " ".join(f"{fmt_num(z.real)},{fmt_num(-z.imag)}" for z in p)
        lines.append(f'<polyline fill="none" stroke="#1f4e79" stroke-width="{stroke}" points="{pts}"/>')
    for z, r in zip(targets, radii):
        z = complex(z)
        lines.append(
            f'<circle cx="{fmt_num(z.real)}" cy="{fmt_num(-z.imag)}" r="{fmt_num(r)}" '
            f'fill="none" stroke="#c0392b" stroke-width="{stroke}"/>'
        )
    lines.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path
