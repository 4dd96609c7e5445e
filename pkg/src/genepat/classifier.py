"""Geometric features of access windows and the six-way pattern decision.

A window is read as a scatter of ``(seq, addr)``.  The extractor finds the
dominant direction of travel, estimates the typical forward step, and marks a
*reset* wherever the address jumps backwards by more than ``reset_factor``
steps.  Resets cut the window into segments; the lengths of the complete
segments between resets are the detected periods.

Decision tree (total, so every window gets exactly one label)::

    not a line (r2 < r2_line)      -> P4
    aperiodic line                 -> P1 if slope <= slope_hi else P3
    fixed-period line              -> P2 if slope <= slope_hi else P6
    variable-period line           -> P5 if slope <= slope_hi else P4
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .patterns import LABELS, PatternLabel, PatternMix
from .trace import MIN_WINDOW, Trace, Window, window_trace

DEFAULT_WINDOW_LEN = 2048


class Periodicity(str, enum.Enum):
    APERIODIC = "aperiodic"
    FIXED = "fixed"
    VARIABLE = "variable"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ClassifierConfig:
    c: int = 64
    d: int = 2048
    r2_line: float = 0.95
    cv_fixed: float = 0.10
    slope_hi: float | None = None  # None means "same as d"
    reset_factor: float = 1.5
    max_pairs: int = 10_000
    min_window: int = MIN_WINDOW
    window_len: int = DEFAULT_WINDOW_LEN

    def __post_init__(self) -> None:
        if not 0 < self.c < self.d:
            raise ParameterError("need 0 < c < d")
        for name in ("r2_line", "cv_fixed"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ParameterError(f"{name} must lie in (0, 1), got {v}")
        if self.slope_hi is not None and self.slope_hi <= 0:
            raise ParameterError("slope_hi must be > 0")
        if self.reset_factor <= 0:
            raise ParameterError("reset_factor must be > 0")
        if self.max_pairs < 1:
            raise ParameterError("max_pairs must be >= 1")
        if self.min_window < 2:
            raise ParameterError("min_window must be >= 2")
        if self.window_len < self.min_window:
            raise ParameterError("window_len must be >= min_window")

    @property
    def slope_threshold(self) -> float:
        return float(self.d if self.slope_hi is None else self.slope_hi)


@dataclass(frozen=True)
class PatternFeatures:
    slope_k: float
    linearity_r2: float
    periodic: Periodicity
    period_mean: float | None = None
    period_cv: float | None = None
    reset_count: int = 0
    period_drift: float | None = None  # share of successive periods that change length


@dataclass(frozen=True)
class WindowResult:
    start: int
    length: int
    label: PatternLabel
    features: PatternFeatures


def _as_offsets(w: Window | Trace | np.ndarray) -> np.ndarray:
    addr = w.addr if isinstance(w, (Window, Trace)) else np.asarray(w, dtype=np.uint64)
    addr = addr.astype(np.uint64, copy=False)
    return (addr - addr.min()).astype(np.float64)


def _segment_r2(y: np.ndarray, bounds: np.ndarray) -> float:
    """Access-weighted coefficient of determination of per-segment line fits.

    A segment whose addresses do not vary (or that has a single record) lies
    on a line trivially and scores 1.
    """
    starts = bounds[:-1]
    lengths = np.diff(bounds).astype(np.float64)
    seg = np.repeat(np.arange(starts.size), np.diff(bounds))
    x = np.arange(y.size, dtype=np.float64) - starts[seg]
    ybar = np.add.reduceat(y, starts) / lengths
    yc = y - ybar[seg]
    xc = x - (lengths[seg] - 1.0) / 2.0
    syy = np.add.reduceat(yc * yc, starts)
    sxy = np.add.reduceat(xc * yc, starts)
    sxx = lengths * (lengths * lengths - 1.0) / 12.0
    r2 = np.ones_like(lengths)
    fit = (syy > 0) & (sxx > 0)
    r2[fit] = np.clip(sxy[fit] ** 2 / (sxx[fit] * syy[fit]), 0.0, 1.0)
    return float(np.dot(r2, lengths) / lengths.sum())


def _theil_sen(y: np.ndarray, bounds: np.ndarray, max_pairs: int) -> float:
    """Median pairwise slope, pairs drawn only within one segment."""
    starts = bounds[:-1]
    lengths = np.diff(bounds)
    usable = lengths >= 2
    if not usable.any():
        return 0.0
    n_pairs = int(np.sum(lengths[usable] * (lengths[usable] - 1) // 2))
    m = min(max_pairs, n_pairs)
    rng = np.random.default_rng(0)
    seg_of = np.repeat(np.arange(starts.size), lengths)
    pool = np.flatnonzero(usable[seg_of])
    i = pool[rng.integers(pool.size, size=m)]
    s = starts[seg_of[i]]
    j = s + rng.integers(0, lengths[seg_of[i]] - 1)
    j = j + (j >= i)
    slopes = (y[j] - y[i]) / (j - i).astype(np.float64)
    return float(abs(np.median(slopes)))


def extract_features(w: Window | Trace | np.ndarray, cfg: ClassifierConfig | None = None) -> PatternFeatures:
    cfg = cfg or ClassifierConfig()
    y = _as_offsets(w)
    n = y.size
    if n < cfg.min_window:
        raise ParameterError(f"window of {n} records is shorter than min_window {cfg.min_window}")

    steps = np.diff(y)
    moving = steps[steps != 0]
    if moving.size == 0:
        return PatternFeatures(0.0, 1.0, Periodicity.APERIODIC)

    direction = 1.0 if np.median(moving) >= 0 else -1.0
    along = steps * direction
    forward = along[along > 0]
    stride = float(np.median(forward)) if forward.size else float(np.median(np.abs(moving)))
    resets = np.flatnonzero(along < -cfg.reset_factor * stride) + 1
    bounds = np.concatenate(([0], resets, [n]))

    periodic = Periodicity.APERIODIC
    p_mean = p_cv = drift = None
    if resets.size >= 2:
        periods = np.diff(resets).astype(np.float64)
        p_mean = float(periods.mean())
        p_cv = float(periods.std() / p_mean)
        trending = False
        if periods.size >= 2:
            changes = np.diff(periods)
            drift = float(np.count_nonzero(changes) / changes.size)
            moved = changes[changes != 0]
            monotone = moved.size > 0 and (np.all(moved > 0) or np.all(moved < 0))
            trending = changes.size >= 2 and drift >= 0.5 and monotone
        periodic = Periodicity.VARIABLE if (p_cv > cfg.cv_fixed or trending) else Periodicity.FIXED

    return PatternFeatures(
        slope_k=_theil_sen(y, bounds, cfg.max_pairs),
        linearity_r2=_segment_r2(y, bounds),
        periodic=periodic,
        period_mean=p_mean,
        period_cv=p_cv,
        reset_count=int(resets.size),
        period_drift=drift,
    )


def classify_window(f: PatternFeatures, cfg: ClassifierConfig | None = None) -> PatternLabel:
    cfg = cfg or ClassifierConfig()
    steep = f.slope_k > cfg.slope_threshold
    if f.linearity_r2 < cfg.r2_line:
        return PatternLabel.P4
    if f.periodic is Periodicity.APERIODIC:
        return PatternLabel.P3 if steep else PatternLabel.P1
    if f.periodic is Periodicity.FIXED:
        return PatternLabel.P6 if steep else PatternLabel.P2
    # steep lines whose period keeps changing behave like random access
    return PatternLabel.P4 if steep else PatternLabel.P5


def classify_windows(
    t: Trace, cfg: ClassifierConfig | None = None, window_len: int | None = None
) -> list[WindowResult]:
    cfg = cfg or ClassifierConfig()
    window_len = cfg.window_len if window_len is None else window_len
    out = []
    for w in window_trace(t, window_len, window_len, cfg.min_window):
        f = extract_features(w, cfg)
        out.append(WindowResult(w.start, w.length, classify_window(f, cfg), f))
    return out


def mix_of(results: Sequence[WindowResult]) -> PatternMix:
    counts = {lab: 0 for lab in LABELS}
    for r in results:
        counts[r.label] += r.length
    return PatternMix.from_counts(counts)


def decompose_trace(
    t: Trace, cfg: ClassifierConfig | None = None, window_len: int | None = None
) -> PatternMix:
    """Share of records in windows of each label (non-overlapping windows)."""
    return mix_of(classify_windows(t, cfg, window_len))


def aggregate_suite(mixes: Sequence[PatternMix]) -> PatternMix:
    """Unweighted mean of hotspot mixes, renormalised."""
    if not mixes:
        raise ParameterError("aggregate_suite needs at least one mix")
    sums = {lab: math.fsum(m.weights[lab] for m in mixes) / len(mixes) for lab in LABELS}
    return PatternMix.from_counts(sums)
