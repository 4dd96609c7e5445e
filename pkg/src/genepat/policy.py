"""Micro-architecture settings suggested by a pattern mix."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParameterError
from .patterns import LABELS, PatternLabel, PatternMix

AMBIGUITY_MARGIN = 0.1
PAGE_POLICIES = ("open", "close")
GRANULARITIES = ("coarse", "fine")
CACHE_LEVELS = ("L1", "L2", "L3")
PREFETCH_MODES = ("stream", "off", "period-aware")


@dataclass(frozen=True)
class PolicyRecommendation:
    page_policy: str
    fetch_granularity: str
    cache_levels: frozenset[str]
    prefetch_mode: str
    rationale: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.page_policy not in PAGE_POLICIES:
            raise ParameterError(f"page_policy must be one of {PAGE_POLICIES}")
        if self.fetch_granularity not in GRANULARITIES:
            raise ParameterError(f"fetch_granularity must be one of {GRANULARITIES}")
        if not self.cache_levels or not set(self.cache_levels) <= set(CACHE_LEVELS):
            raise ParameterError(f"cache_levels must be a non-empty subset of {CACHE_LEVELS}")
        if self.prefetch_mode not in PREFETCH_MODES:
            raise ParameterError(f"prefetch_mode must be one of {PREFETCH_MODES}")
        if not self.rationale:
            raise ParameterError("rationale must not be empty")

    def levels_text(self) -> str:
        return "+".join(lvl for lvl in CACHE_LEVELS if lvl in self.cache_levels)


def _tag(label: PatternLabel) -> str:
    return f"[policy:{label.value}]"


_ALL = frozenset(CACHE_LEVELS)

TABLE: dict[PatternLabel, PolicyRecommendation] = {
    PatternLabel.P1: PolicyRecommendation(
        "open", "coarse", _ALL, "stream",
        (f"{_tag(PatternLabel.P1)} low-slope streaming keeps hitting the open DRAM row",),
    ),
    PatternLabel.P2: PolicyRecommendation(
        "open", "coarse", _ALL, "stream",
        (f"{_tag(PatternLabel.P2)} a short period is reused from cache, so caching and wide fetches pay off",),
    ),
    PatternLabel.P3: PolicyRecommendation(
        "close", "fine", _ALL, "stream",
        (f"{_tag(PatternLabel.P3)} each access lands in a new row, closing rows early saves precharge time",),
    ),
    PatternLabel.P4: PolicyRecommendation(
        "close", "fine", frozenset({"L1"}), "off",
        (
            f"{_tag(PatternLabel.P4)} random targets get little from L2/L3, keep them in L1 only",
            f"{_tag(PatternLabel.P4)} prefetching random addresses only wastes bandwidth",
        ),
    ),
    PatternLabel.P5: PolicyRecommendation(
        "open", "coarse", _ALL, "period-aware",
        (
            f"{_tag(PatternLabel.P5)} low slope leaves reuse, so caching and wide fetches pay off",
            f"{_tag(PatternLabel.P5)} the prefetcher should re-arm at each period reset since periods vary",
        ),
    ),
    PatternLabel.P6: PolicyRecommendation(
        "close", "fine", frozenset({"L3"}), "stream",
        (f"{_tag(PatternLabel.P6)} the period is reused but too large for L1/L2, allocate it in the LLC",),
    ),
}


@dataclass(frozen=True)
class Advice:
    per_label: dict[PatternLabel, PolicyRecommendation]
    dominant_label: PatternLabel
    dominant: PolicyRecommendation
    margin: float  # weight gap between the top two labels
    ambiguous: bool


def recommend(mix: PatternMix) -> Advice:
    if not isinstance(mix, PatternMix):
        mix = PatternMix(mix)
    ranked = mix.ranked()
    top, w1 = ranked[0]
    margin = w1 - ranked[1][1]
    return Advice(
        per_label={lab: TABLE[lab] for lab in LABELS},
        dominant_label=top,
        dominant=TABLE[top],
        margin=margin,
        ambiguous=margin < AMBIGUITY_MARGIN,
    )
