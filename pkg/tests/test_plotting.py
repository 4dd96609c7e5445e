import xml.etree.ElementTree as ET

import numpy as np
import pytest

from genepat.errors import ParameterError
from genepat.plotting import (
    RenderSpec,
    downsample_indices,
    pattern_figure,
    pattern_points,
    ptmap_figure,
    render_pattern_figure,
    render_ptmap,
)
from genepat.ptmap import PtMapPoint, energy_level, indifference_curve_points, suite_centers
from genepat.synthgen import GenSpec, generate
from genepat.trace import Trace

SVG = "{http://www.w3.org/2000/svg}svg"


def test_render_spec_validation():
    with pytest.raises(ParameterError):
        RenderSpec(width=0)
    with pytest.raises(ParameterError):
        RenderSpec(max_points=99)


def test_downsampling_keeps_ends():
    idx = downsample_indices(1_000_003, 20_000)
    assert len(idx) <= 20_000
    assert idx[0] == 0 and idx[-1] == 1_000_002
    assert np.all(np.diff(idx) > 0)


def test_small_trace_plots_every_point():
    t = generate(GenSpec("P2"), 10)
    x, y = pattern_points(t, RenderSpec())
    assert x.tolist() == list(range(10))
    assert y.tolist() == t.addr.astype(float).tolist()


def test_line_pattern_points_are_collinear():
    t = generate(GenSpec("P1", stride=128), 100_000)
    x, y = pattern_points(t, RenderSpec(max_points=5000))
    assert len(x) <= 5000 and x[0] == 0 and x[-1] == 99_999
    # perpendicular deviation from the fitted line, both axes scaled to [0, 1]
    u = (x - x.min()) / np.ptp(x)
    v = (y - y.min()) / np.ptp(y)
    k, b = np.polyfit(u, v, 1)
    dev = np.abs(k * u - v + b) / np.hypot(k, 1.0)
    assert dev.max() < 0.01


def test_pattern_figure_axes():
    fig = pattern_figure(generate(GenSpec("P5", n_outer=50)))
    ax = fig.axes[0]
    assert ax.get_xlabel() == "access sequence" and ax.get_ylabel() == "address"


def test_pattern_svg_is_deterministic_and_well_formed():
    t = generate(GenSpec("P4", seed=9), 3000)
    a, b = render_pattern_figure(t), render_pattern_figure(t)
    assert a == b
    assert ET.fromstring(a).tag == SVG


def test_empty_trace_rejected():
    t = Trace(np.zeros(0, np.uint64), np.zeros(0, bool), np.zeros(0))
    with pytest.raises(ParameterError):
        render_pattern_figure(t)


def _eight_suites():
    pts = []
    for i in range(8):
        for j in range(3):
            pts.append(PtMapPoint(f"s{i}h{j}", 0.01 * (i + 1) * (j + 1), 10.0 ** (i / 2 + j / 4), f"suite{i}"))
    centers = suite_centers(pts)
    curves = [(s, indifference_curve_points(energy_level(c), (1e-3, 1.0), 32)) for s, c in centers.items()]
    return pts, centers, curves


def test_ptmap_has_crosses_and_dashed_curves():
    pts, centers, curves = _eight_suites()
    fig = ptmap_figure(pts, centers, curves)
    ax = fig.axes[0]
    dashed = [ln for ln in ax.get_lines() if ln.get_linestyle() == "--"]
    assert len(dashed) == 8
    crosses = [c for c in ax.collections if len(c.get_offsets()) == 1 and c.get_linewidths()[0] == 2]
    assert len(crosses) == 8
    assert ax.get_xscale() == "log" and ax.get_yscale() == "log"
    legend = [t.get_text() for t in ax.get_legend().get_texts()]
    assert legend == sorted(centers)
    svg = render_ptmap(pts, centers, curves)
    assert svg.count('id="curve-') == 8
    assert ET.fromstring(svg).tag == SVG
    assert svg == render_ptmap(pts, centers, curves)


def test_single_point_map():
    svg = render_ptmap([PtMapPoint("only", 0.2, 30, "x")])
    assert ET.fromstring(svg).tag == SVG


def test_floored_points_render():
    svg = render_ptmap([PtMapPoint("z", 0.0, 0.0, "x"), PtMapPoint("w", 0.1, 10, "x")])
    assert ET.fromstring(svg).tag == SVG
    with pytest.raises(ParameterError):
        render_ptmap([])
