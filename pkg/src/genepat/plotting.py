"""SVG rendering of access scatters and the APC/RaL map.

Figures are built with the object-oriented matplotlib API on a private SVG
canvas, with the SVG hash salt and date metadata pinned so identical inputs
give identical bytes.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Mapping, Sequence

import matplotlib
import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .errors import ParameterError
from .ptmap import PtMapPoint
from .trace import Trace

DPI = 100
_RC = {"svg.hashsalt": "genepat", "svg.fonttype": "path"}
if "svg.id" in matplotlib.rcParams:
    _RC["svg.id"] = "genepat"


@dataclass(frozen=True)
class RenderSpec:
    width: int = 800  # pixels
    height: int = 600
    max_points: int = 20_000
    log_axes: tuple[bool, bool] = (False, False)
    title: str = ""

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ParameterError("width and height must be positive")
        if self.max_points < 100:
            raise ParameterError("max_points must be >= 100")


def downsample_indices(n: int, max_points: int) -> np.ndarray:
    """Evenly spread record indices, always keeping the first and the last."""
    if n <= max_points:
        return np.arange(n)
    return np.unique(np.linspace(0, n - 1, max_points).round().astype(np.int64))


def pattern_points(t: Trace, spec: RenderSpec) -> tuple[np.ndarray, np.ndarray]:
    """The ``(seq, addr)`` pairs a pattern figure plots."""
    if len(t) == 0:
        raise ParameterError("cannot plot an empty trace")
    idx = downsample_indices(len(t), spec.max_points)
    return t.seq[idx].astype(np.float64), t.addr[idx].astype(np.float64)


def _figure(spec: RenderSpec) -> Figure:
    fig = Figure(figsize=(spec.width / DPI, spec.height / DPI), dpi=DPI)
    FigureCanvasSVG(fig)
    return fig


def _to_svg(fig: Figure) -> str:
    buf = io.StringIO()
    with matplotlib.rc_context(_RC):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()


def pattern_figure(t: Trace, spec: RenderSpec | None = None) -> Figure:
    spec = spec or RenderSpec()
    x, y = pattern_points(t, spec)
    fig = _figure(spec)
    ax = fig.add_subplot()
    ax.scatter(x, y, s=2, marker=".", linewidths=0, color="tab:blue", rasterized=False)
    ax.set_xlabel("access sequence")
    ax.set_ylabel("address")
    if spec.log_axes[0]:
        ax.set_xscale("log")
    if spec.log_axes[1]:
        ax.set_yscale("log")
    ax.set_title(spec.title or t.origin or "access pattern")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def render_pattern_figure(t: Trace, spec: RenderSpec | None = None) -> str:
    return _to_svg(pattern_figure(t, spec))


def ptmap_figure(
    points: Sequence[PtMapPoint],
    centers: Mapping[str, PtMapPoint] | None = None,
    curves: Sequence[tuple[str, Sequence[tuple[float, float]]]] = (),
    spec: RenderSpec | None = None,
) -> Figure:
    """Log-log map: one color per suite, crosses at centers, dashed level curves."""
    spec = spec or RenderSpec(log_axes=(True, True))
    if not points:
        raise ParameterError("ptmap needs at least one point")
    centers = centers or {}
    suites = sorted({p.suite for p in points} | set(centers))
    cmap = matplotlib.colormaps["tab10"]
    color = {s: cmap(i % 10) for i, s in enumerate(suites)}

    fig = _figure(spec)
    ax = fig.add_subplot()
    for s in suites:
        members = [p for p in points if p.suite == s]
        if members:
            ax.scatter(
                [p.l3_apc for p in members], [p.ral for p in members],
                s=24, color=color[s], label=s or "(none)", zorder=3,
            )
        if s in centers:
            c = centers[s]
            ax.scatter([c.l3_apc], [c.ral], marker="x", s=80, linewidths=2, color=color[s], zorder=4)
    for name, pts in curves:
        if len(pts) < 2:
            continue
        apc, ral = zip(*pts)
        ax.plot(apc, ral, linestyle="--", linewidth=0.8, color="0.5", zorder=1, gid=f"curve-{name}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("L3 APC (accesses per memory-active cycle)")
    ax.set_ylabel("RaL (L1 hits per off-chip movement)")
    ax.set_title(spec.title or "pattern map")
    ax.grid(True, which="major", alpha=0.3)
    ax.legend(loc="best", fontsize="small", title="suite")
    fig.tight_layout()
    return fig


def render_ptmap(
    points: Sequence[PtMapPoint],
    centers: Mapping[str, PtMapPoint] | None = None,
    curves: Sequence[tuple[str, Sequence[tuple[float, float]]]] = (),
    spec: RenderSpec | None = None,
) -> str:
    return _to_svg(ptmap_figure(points, centers, curves, spec))
