"""Hotspot selection from per-segment timing profiles."""

from __future__ import annotations

import math
import re
from fractions import Fraction
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParameterError, TraceFormatError

DEFAULT_THRESHOLD_PCT = 5.0


@dataclass(frozen=True)
class ProfileRecord:
    segment_id: str
    t: float  # wall-clock seconds spent in the segment
    n: int  # threads running it
    source_loc: str = ""

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t) and self.t >= 0):
            raise ParameterError(f"{self.segment_id}: t must be finite and >= 0")
        if self.n < 1:
            raise ParameterError(f"{self.segment_id}: n must be >= 1")


@dataclass(frozen=True)
class ProgramProfile:
    records: list[ProfileRecord] = field(default_factory=list)
    t_s: float = 0.0  # sequential-section seconds
    t_p: float = 0.0  # parallel-section seconds
    threshold_pct: float = DEFAULT_THRESHOLD_PCT

    def __post_init__(self) -> None:
        if self.t_s < 0 or self.t_p < 0:
            raise ParameterError("t_s and t_p must be >= 0")
        if not self.t_s + self.t_p > 0:
            raise ParameterError("t_s + t_p must be > 0")
        if not math.isfinite(self.threshold_pct):
            raise ParameterError("threshold_pct must be finite")


def importance(r: ProfileRecord, p: ProgramProfile) -> float:
    """Share of effective runtime owed to ``r``: ``t*n / (t_s + n*t_p)``.

    Evaluated in exact rational arithmetic and rounded once, so the result
    is the float nearest the true quotient.  Raises ZeroDivisionError when
    the denominator is zero.
    """
    return float(Fraction(r.t) * r.n / (Fraction(p.t_s) + r.n * Fraction(p.t_p)))


def select_hotspots(p: ProgramProfile) -> list[tuple[str, float]]:
    """Records whose importance strictly exceeds the threshold, largest first."""
    cut = p.threshold_pct / 100.0
    scored = [(r.segment_id, importance(r, p)) for r in p.records]
    hot = [s for s in scored if s[1] > cut]
    return sorted(hot, key=lambda s: (-s[1], s[0]))


_HEADER = re.compile(r"^\s*TS=(\S+)\s+TP=(\S+)(?:\s+DELTA=(\S+))?\s*$", re.IGNORECASE)


def parse_profile(text: str) -> ProgramProfile:
    """Read ``TS=<s> TP=<s> DELTA=<pct>`` then ``segment_id,t_seconds,n[,source_loc]`` lines."""
    lines = [(i, ln) for i, ln in enumerate(text.splitlines(), 1) if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise TraceFormatError("profile: empty input")
    lineno, header = lines[0]
    m = _HEADER.match(header)
    if not m:
        raise TraceFormatError(f"profile line {lineno}: expected 'TS=<sec> TP=<sec> DELTA=<pct>'")
    try:
        t_s, t_p = float(m.group(1)), float(m.group(2))
        delta = float(m.group(3)) if m.group(3) is not None else DEFAULT_THRESHOLD_PCT
    except ValueError:
        raise TraceFormatError(f"profile line {lineno}: non-numeric header value") from None
    records = []
    for lineno, ln in lines[1:]:
        parts = [x.strip() for x in ln.split(",", 3)]
        if len(parts) < 3:
            raise TraceFormatError(f"profile line {lineno}: expected segment_id,t_seconds,n")
        try:
            t, n = float(parts[1]), int(parts[2])
        except ValueError:
            raise TraceFormatError(f"profile line {lineno}: bad t or n") from None
        records.append(ProfileRecord(parts[0], t, n, parts[3] if len(parts) > 3 else ""))
    return ProgramProfile(records, t_s, t_p, delta)


def read_profile(path: str | Path) -> ProgramProfile:
    return parse_profile(Path(path).read_text())
