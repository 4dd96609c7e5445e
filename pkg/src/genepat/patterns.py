"""The six base access patterns and weight vectors over them."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import ParameterError


class PatternLabel(str, enum.Enum):
    P1 = "P1"  # aperiodic line, low slope
    P2 = "P2"  # fixed-period sawtooth, low slope
    P3 = "P3"  # aperiodic line, high slope
    P4 = "P4"  # random access (anything that is not a line)
    P5 = "P5"  # variable-period sawtooth, low slope
    P6 = "P6"  # fixed-period sawtooth, high slope

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "PatternLabel":
        try:
            return cls(text.strip().upper())
        except ValueError:
            raise ParameterError(f"unknown pattern label {text!r}") from None


LABELS: tuple[PatternLabel, ...] = tuple(PatternLabel)
MIX_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PatternMix:
    """Non-negative weights over all six labels, summing to one."""

    weights: Mapping[PatternLabel, float]

    def __post_init__(self) -> None:
        full = {lab: 0.0 for lab in LABELS}
        for k, v in dict(self.weights).items():
            lab = k if isinstance(k, PatternLabel) else PatternLabel.parse(str(k))
            full[lab] += float(v)
        for lab, w in full.items():
            if not math.isfinite(w) or w < 0:
                raise ParameterError(f"weight for {lab} must be finite and >= 0, got {w}")
        total = math.fsum(full.values())
        if abs(total - 1.0) > MIX_TOLERANCE:
            raise ParameterError(f"mix weights sum to {total!r}, expected 1")
        object.__setattr__(self, "weights", full)

    @classmethod
    def from_counts(cls, counts: Mapping[PatternLabel, float]) -> "PatternMix":
        total = math.fsum(counts.values())
        if total <= 0:
            raise ParameterError("cannot normalise an all-zero count vector")
        return cls({k: v / total for k, v in counts.items()})

    @classmethod
    def pure(cls, label: PatternLabel | str) -> "PatternMix":
        return cls({label: 1.0})

    def __getitem__(self, label: PatternLabel | str) -> float:
        lab = label if isinstance(label, PatternLabel) else PatternLabel.parse(label)
        return self.weights[lab]

    def as_vector(self) -> list[float]:
        return [self.weights[lab] for lab in LABELS]

    def ranked(self) -> list[tuple[PatternLabel, float]]:
        """Labels by descending weight; equal weights fall back to label order."""
        return sorted(self.weights.items(), key=lambda kv: (-kv[1], kv[0].value))

    def dominant(self) -> PatternLabel:
        return self.ranked()[0][0]

    def nonzero(self) -> dict[PatternLabel, float]:
        return {k: v for k, v in self.weights.items() if v > 0}


def mix_from_pairs(pairs: Iterable[tuple[str, float]]) -> PatternMix:
    return PatternMix({PatternLabel.parse(k): v for k, v in pairs})
