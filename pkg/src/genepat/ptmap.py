"""Hotspots placed in (L3 APC, RaL) space with iso-performance levels.

The level of a point is ``log10(ral) + beta * log10(l3_apc)``, so every curve
of constant level is a straight line on log-log axes and RaL can be traded
against APC at a rate set by ``beta``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class PtMapConfig:
    beta: float = 1.0
    epsilon: float = 1e-6

    def __post_init__(self) -> None:
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ParameterError("beta must be a finite number > 0")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ParameterError("epsilon must be a finite number > 0")


@dataclass(frozen=True)
class PtMapPoint:
    """One hotspot or suite center.  Values at or below zero are floored."""

    label: str
    l3_apc: float
    ral: float
    suite: str = ""
    flags: tuple[str, ...] = field(default=())
    epsilon: float = 1e-6

    def __post_init__(self) -> None:
        flags = list(self.flags)
        for name in ("l3_apc", "ral"):
            v = float(getattr(self, name))
            if math.isnan(v) or math.isinf(v):
                raise ParameterError(f"{self.label}: {name} must be finite, got {v}")
            if v <= 0:
                v = self.epsilon
                flags.append(f"{name}_floored")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "flags", tuple(dict.fromkeys(flags)))

    @property
    def floored(self) -> bool:
        return bool(self.flags)


@dataclass(frozen=True, order=True)
class EnergyLevel:
    value: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ParameterError(f"energy level must be finite, got {self.value}")


def _level(ral: float, apc: float, beta: float) -> float:
    if not (ral > 0 and apc > 0):
        raise ParameterError(f"energy needs positive ral and l3_apc, got ral={ral}, l3_apc={apc}")
    return math.log10(ral) + beta * math.log10(apc)


def energy_level(p: PtMapPoint, cfg: PtMapConfig | None = None) -> EnergyLevel:
    cfg = cfg or PtMapConfig()
    return EnergyLevel(_level(p.ral, p.l3_apc, cfg.beta))


def suite_centers(points: Sequence[PtMapPoint]) -> dict[str, PtMapPoint]:
    """Geometric-mean center of each suite, keyed by suite id in sorted order."""
    if not points:
        raise ParameterError("suite_centers needs at least one point")
    groups: dict[str, list[PtMapPoint]] = defaultdict(list)
    for p in points:
        groups[p.suite].append(p)
    out = {}
    for suite in sorted(groups):
        members = groups[suite]
        log_ral = math.fsum(math.log10(p.ral) for p in members) / len(members)
        log_apc = math.fsum(math.log10(p.l3_apc) for p in members) / len(members)
        out[suite] = PtMapPoint(suite, 10.0**log_apc, 10.0**log_ral, suite)
    return out


def order_suites(centers: Mapping[str, PtMapPoint], cfg: PtMapConfig | None = None) -> list[str]:
    """Suite ids by ascending energy of their centers; ties go to the smaller id."""
    cfg = cfg or PtMapConfig()
    if not centers:
        raise ParameterError("order_suites needs at least one suite")
    return sorted(centers, key=lambda s: (energy_level(centers[s], cfg).value, s))


def indifference_curve_points(
    level: EnergyLevel | float,
    apc_range: tuple[float, float],
    n: int,
    cfg: PtMapConfig | None = None,
) -> list[tuple[float, float]]:
    """``n`` points ``(l3_apc, ral)`` of constant level, APC log-spaced over the range."""
    cfg = cfg or PtMapConfig()
    value = level.value if isinstance(level, EnergyLevel) else float(level)
    lo, hi = (float(v) for v in apc_range)
    if not (0 < lo < hi and math.isfinite(hi)):
        raise ParameterError(f"apc_range must satisfy 0 < lo < hi, got {apc_range}")
    if n < 2:
        raise ParameterError("n must be >= 2")
    log_apc = np.linspace(math.log10(lo), math.log10(hi), n)
    apc = 10.0**log_apc
    apc[0], apc[-1] = lo, hi
    return [(float(a), 10.0 ** (value - cfg.beta * math.log10(a))) for a in apc]
