import re

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slelab import InvalidArgumentError
from slelab.loewner import DrivingPath, sample_driving, trace_curve
from slelab.output import (
    COLUMNS,
    ResultRow,
    emit_results,
    fmt_num,
    render_traces,
    rows_from_csv,
    rows_from_json,
    rows_to_csv,
)


def row(**kw):
    base = dict(
        experiment_id="x", kappa=8 / 3, n_points=1, points="0:1", radii="0.1", n_samples=100, dt=2.5e-5,
        truncation_factor=20.0, seed=0, raw_p=0.123456789012345, stderr=0.01, rescaled=None, ratio_to_F=None,
    )
    base.update(kw)
    return ResultRow(**base)


def test_header_only_csv(tmp_path):
    p = emit_results([], "csv", tmp_path / "r.csv")
    assert p.read_text() == ",".join(COLUMNS) + "\n"


def test_one_row_csv(tmp_path):
    text = emit_results([row()], "csv", tmp_path / "r.csv").read_text()
    lines = text.splitlines()
    assert len(lines) == 2
    assert lines[1].split(",")[9] == "0.123456789012"


def test_twelve_significant_digits():
    assert fmt_num(2.0 / 3.0) == "0.666666666667"
    assert fmt_num(1e-30 / 3) == "3.33333333333e-31"
    assert fmt_num(7) == "7"
    assert fmt_num(None) == ""


def test_json_round_trip(tmp_path):
    rows = [row(), row(experiment_id="y", rescaled=1.5, ratio_to_F=float("inf"), wall_ms=3.25)]
    p = emit_results(rows, "json", tmp_path / "r.json")
    assert rows_from_json(p.read_text()) == rows


@given(st.floats(allow_nan=False, allow_infinity=False), st.floats(0, 1))
def test_csv_round_trip_exact(x, p):
    rows = [row(kappa=abs(x) % 8 or 1.0, raw_p=p, stderr=x)]
    assert rows_from_csv(rows_to_csv(rows)) == rows


def test_unknown_format(tmp_path):
    with pytest.raises(InvalidArgumentError):
        emit_results([], "xml", tmp_path / "r.xml")


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        emit_results([row()], "csv", tmp_path / "missing" / "r.csv")


def test_render_one_trace_two_discs(tmp_path):
    tr = trace_curve(sample_driving(8 / 3, 0.2, 1e-3, seed=1))
    svg = render_traces([tr], [1j, 2j], [0.1, 0.1], tmp_path / "t.svg").read_text()
    assert svg.count("<polyline") == 1
    assert svg.count("<circle") == 2


def test_render_zero_driving_is_vertical(tmp_path):
    tr = trace_curve(DrivingPath.zero(1.0, 1e-2))
    svg = render_traces([tr], [], [], tmp_path / "t.svg").read_text()
    pts = re.search(r'points="([^"]+)"', svg).group(1).split()
    xs = {float(p.split(",")[0]) for p in pts}
    assert xs == {0.0}


def test_render_decimates(tmp_path):
    traces = [trace_curve(sample_driving(8 / 3, 0.5, 1e-3, seed=s)) for s in range(100)]
    small = render_traces(traces, [], [], tmp_path / "a.svg", max_points=50).stat().st_size
    big = render_traces(traces, [], [], tmp_path / "b.svg", max_points=400).stat().st_size
    assert small < big
    text = (tmp_path / "a.svg").read_text()
    assert text.count("<polyline") == 100
    for m in re.finditer(r'points="([^"]+)"', text):
        assert len(m.group(1).split()) <= 51


def test_render_empty_raises(tmp_path):
    with pytest.raises(InvalidArgumentError):
        render_traces([], [], [], tmp_path / "x.svg")


def test_render_viewbox_margin(tmp_path):
    tr = trace_curve(DrivingPath.zero(1.0, 1e-2))
    svg = render_traces([tr], [3 + 1j], [0.5], tmp_path / "t.svg").read_text()
    x0, y0, w, h = map(float, re.search(r'viewBox="([^"]+)"', svg).group(1).split())
    # union box: x in [0, 3.5], y in [0, 2]
    assert x0 == pytest.approx(-0.35) and w == pytest.approx(3.5 * 1.2)
    assert y0 == pytest.approx(-2.2) and h == pytest.approx(2.4)
    assert np.isfinite([x0, y0, w, h]).all()
