"""Deterministic synthetic traces, one generator per base pattern.

Each generator realises an abstract loop nest:

====  ===========================================  ===================
P1    ``for i: op A[i]``                            stride > c
P2    ``for i: for j < period: op A[j]``            stride < d
P3    ``for i: op A[B[i]]`` (B strides regularly)   stride > d
P4    ``for i: op A[random()]``                     large footprint
P5    ``for i in 1..n: for j in 1..i: op A[j]``     stride > c
P6    ``for i: for j < period: op A[B[j]]``         stride > d
====  ===========================================  ===================

``c`` is the cache line size and ``d`` the prefetcher trigger distance.

Random offsets come from SplitMix64 so other implementations can reproduce
P4 traces bit for bit: output ``k`` (1-based) for seed ``s`` is
``mix(s + k * 0x9E3779B97F4A7C15 mod 2**64)`` where ``mix`` is the usual
30/27/31 xor-shift-multiply finaliser.  The target slot is that value modulo
``footprint // size``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .patterns import PatternLabel
from .trace import ADDR_MAX, MAX_ACCESS_SIZE, Trace, concat

GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1

MIN_RANDOM_FOOTPRINT = 1 << 20
OP_MIXES = ("read", "write", "rmw")

_DEFAULT_STRIDE = {
    PatternLabel.P1: 128,
    PatternLabel.P2: 8,
    PatternLabel.P3: 4096,
    PatternLabel.P4: 8,
    PatternLabel.P5: 128,
    PatternLabel.P6: 4096,
}


def splitmix64(seed: int, count: int) -> np.ndarray:
    """The first ``count`` SplitMix64 outputs for ``seed`` as a uint64 array."""
    k = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & MASK64) + k * np.uint64(GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
        z = z ^ (z >> np.uint64(31))
    return z


@dataclass(frozen=True)
class GenSpec:
    """Parameters of one synthetic pattern.

    ``n_outer`` is the trip count of the outermost loop: accesses for P1/P3,
    sweeps for P2/P6, iterations for P4 and the triangle bound for P5.  When
    ``elem_count`` is set for P5 it becomes the triangle bound and
    ``n_outer`` counts whole triangles.  ``stride`` defaults per pattern.
    """

    pattern: PatternLabel
    base_addr: int = 0x10000000
    stride: int | None = None
    period: int = 64
    n_outer: int = 1024
    footprint: int = 1 << 30
    elem_count: int = 0
    seed: int = 0
    size: int = 8
    op_mix: str | None = None
    rng_state_read: bool = True
    c: int = 64
    d: int = 2048

    def __post_init__(self) -> None:
        if not isinstance(self.pattern, PatternLabel):
            object.__setattr__(self, "pattern", PatternLabel.parse(str(self.pattern)))
        if self.stride is None:
            object.__setattr__(self, "stride", _DEFAULT_STRIDE[self.pattern])
        if self.op_mix is None:
            object.__setattr__(self, "op_mix", "rmw" if self.pattern is PatternLabel.P4 else "read")

    def with_(self, **changes) -> "GenSpec":
        return replace(self, **changes)


def check_spec(spec: GenSpec) -> None:
    p, s = spec.pattern, spec.stride
    if not 1 <= spec.size <= MAX_ACCESS_SIZE:
        raise ParameterError(f"size must be in [1, {MAX_ACCESS_SIZE}]")
    if spec.op_mix not in OP_MIXES:
        raise ParameterError(f"op_mix must be one of {OP_MIXES}")
    if spec.n_outer < 1:
        raise ParameterError("n_outer must be >= 1")
    if not 0 <= spec.seed <= MASK64:
        raise ParameterError("seed must be an unsigned 64-bit integer")
    if not 0 < spec.c < spec.d:
        raise ParameterError("need 0 < c < d")
    if p is not PatternLabel.P4 and s < 1:
        raise ParameterError("stride must be >= 1")
    if p in (PatternLabel.P1, PatternLabel.P5) and not s > spec.c:
        raise ParameterError(f"{p} needs stride > c ({spec.c}), got {s}")
    if p is PatternLabel.P2 and not s < spec.d:
        raise ParameterError(f"P2 needs stride < d ({spec.d}), got {s}")
    if p in (PatternLabel.P3, PatternLabel.P6) and not s > spec.d:
        raise ParameterError(f"{p} needs stride > d ({spec.d}), got {s}")
    if p in (PatternLabel.P2, PatternLabel.P6) and spec.period < 2:
        raise ParameterError("period must be >= 2")
    if p is PatternLabel.P4:
        if spec.footprint < MIN_RANDOM_FOOTPRINT:
            raise ParameterError(f"P4 footprint must be >= {MIN_RANDOM_FOOTPRINT} bytes")
        if spec.footprint < spec.size:
            raise ParameterError("footprint smaller than one element")
    if spec.base_addr < 0 or spec.base_addr + _extent(spec) > ADDR_MAX:
        raise ParameterError("generated addresses would leave the 64-bit address space")


def _triangle_bound(spec: GenSpec) -> tuple[int, int]:
    if spec.elem_count > 0:
        return spec.elem_count, spec.n_outer
    return spec.n_outer, 1


def natural_length(spec: GenSpec) -> int:
    p = spec.pattern
    if p in (PatternLabel.P1, PatternLabel.P3):
        return spec.n_outer
    if p in (PatternLabel.P2, PatternLabel.P6):
        return spec.n_outer * spec.period
    if p is PatternLabel.P5:
        bound, reps = _triangle_bound(spec)
        return reps * bound * (bound + 1) // 2
    return spec.n_outer * _records_per_target(spec)


def _records_per_target(spec: GenSpec) -> int:
    k = 2 if spec.op_mix == "rmw" else 1
    if spec.pattern is PatternLabel.P4 and spec.rng_state_read:
        k += 1
    return k


def _extent(spec: GenSpec, n: int | None = None) -> int:
    n = natural_length(spec) if n is None else n
    p = spec.pattern
    if p in (PatternLabel.P1, PatternLabel.P3):
        return max(n - 1, 0) * spec.stride + spec.size
    if p in (PatternLabel.P2, PatternLabel.P6):
        return (spec.period - 1) * spec.stride + spec.size
    if p is PatternLabel.P5:
        return (_triangle_bound(spec)[0] - 1) * spec.stride + spec.size
    return _state_addr_offset(spec) + 8


def _state_addr_offset(spec: GenSpec) -> int:
    return -(-spec.footprint // 64) * 64


def _triangle(bound: int) -> np.ndarray:
    lengths = np.arange(1, bound + 1, dtype=np.int64)
    total = int(lengths.sum())
    starts = np.repeat(np.cumsum(lengths) - lengths, lengths)
    return np.arange(total, dtype=np.int64) - starts


def _expand_ops(targets: np.ndarray, spec: GenSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Turn per-iteration target addresses into records according to ``op_mix``."""
    m = targets.shape[0]
    if _records_per_target(spec) == 1:
        return targets, np.full(m, spec.op_mix == "write"), np.full(m, spec.size, np.int64)
    slots: list[tuple[np.ndarray, bool, int]] = []
    if spec.pattern is PatternLabel.P4 and spec.rng_state_read:
        state = np.full(m, spec.base_addr + _state_addr_offset(spec), dtype=np.uint64)
        slots.append((state, False, 8))
    if spec.op_mix in ("read", "rmw"):
        slots.append((targets, False, spec.size))
    if spec.op_mix in ("write", "rmw"):
        slots.append((targets, True, spec.size))
    k = len(slots)
    addr = np.empty(m * k, dtype=np.uint64)
    write = np.empty(m * k, dtype=bool)
    size = np.empty(m * k, dtype=np.int64)
    for j, (a, w, z) in enumerate(slots):
        addr[j::k] = a
        write[j::k] = w
        size[j::k] = z
    return addr, write, size


def generate(spec: GenSpec, n_records: int | None = None) -> Trace:
    """Realise ``spec`` as a trace.

    With ``n_records`` the loop nest is run (cyclically for the bounded
    patterns) until exactly that many records exist.
    """
    check_spec(spec)
    n = natural_length(spec) if n_records is None else int(n_records)
    if n < 0:
        raise ParameterError("n_records must be >= 0")
    if spec.pattern in (PatternLabel.P1, PatternLabel.P3) and spec.base_addr + _extent(spec, n) > ADDR_MAX:
        raise ParameterError("generated addresses would leave the 64-bit address space")

    p = spec.pattern
    base = np.uint64(spec.base_addr)
    stride = np.uint64(spec.stride)
    per_iter = _records_per_target(spec)
    iters = -(-n // per_iter)

    if p in (PatternLabel.P1, PatternLabel.P3):
        targets = base + np.arange(iters, dtype=np.uint64) * stride
    elif p in (PatternLabel.P2, PatternLabel.P6):
        targets = base + (np.arange(iters, dtype=np.uint64) % np.uint64(spec.period)) * stride
    elif p is PatternLabel.P5:
        tri = _triangle(_triangle_bound(spec)[0]).astype(np.uint64)
        targets = base + np.resize(tri, iters) * stride
    else:
        slots = np.uint64(spec.footprint // spec.size)
        targets = base + (splitmix64(spec.seed, iters) % slots) * np.uint64(spec.size)

    addr, write, size = _expand_ops(targets, spec)
    label = p.value
    return Trace(addr[:n], write[:n], size[:n], origin=f"synthgen:{label}", segments=((label, 0, n),))


def _apportion(fractions: Sequence[float], total: int) -> list[int]:
    raw = [f * total for f in fractions]
    counts = [math.floor(r) for r in raw]
    short = total - sum(counts)
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return counts


def generate_mix(parts: Sequence[tuple[GenSpec, float]], total: int | None = None) -> Trace:
    """Concatenate one sub-trace per spec, sized in proportion to its fraction.

    ``total`` defaults to the sum of the natural lengths of the parts.  The result's
    ``segments`` attribute names the generating pattern of each record range.
    """
    if not parts:
        raise ParameterError("generate_mix needs at least one (spec, fraction) pair")
    fractions = [float(f) for _, f in parts]
    if any(not f > 0 for f in fractions):
        raise ParameterError("fractions must be > 0")
    if abs(math.fsum(fractions) - 1.0) > 1e-9:
        raise ParameterError(f"fractions sum to {math.fsum(fractions)!r}, expected 1")
    if total is None:
        total = sum(natural_length(s) for s, _ in parts)
    counts = _apportion(fractions, total)

    pieces, segments = [], []
    start = 0
    for (spec, _), count in zip(parts, counts):
        pieces.append(generate(spec, count))
        segments.append((spec.pattern.value, start, start + count))
        start += count
    origin = "mix:" + ";".join(f"{lab}[{a}:{b}]" for lab, a, b in segments)
    out = concat(pieces, origin=origin)
    out.segments = tuple(segments)
    return out
