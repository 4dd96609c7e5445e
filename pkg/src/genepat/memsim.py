"""Trace-driven three-level cache model with an L2 stream prefetcher.

Functional side: LRU set-associative L1/L2/L3 (or fully associative), every
miss fills all levels on the way back, write-allocate.  Lines are not
back-invalidated when an outer level evicts them.

Timing side: an in-order engine.  Each line access costs the L1 lookup
latency plus ``compute_cycles`` of engine time.  An L1 miss occupies an MSHR
until its data arrives (latency of the level that served it) and otherwise
overlaps with later accesses.  The engine stalls when all MSHRs are busy, and
when a write hits a line whose fill is still in flight (the write half of a
read-modify-write waits for the read).  Prefetches cost no time.
"""

from __future__ import annotations

import heapq
from dataclasses import asdict, dataclass, field, fields
from typing import Mapping

import numpy as np

from .errors import ParameterError
from .trace import Trace

REFERENCE_LRU_MAX = 100_000


@dataclass(frozen=True)
class HierarchyConfig:
    line_size: int = 64
    l1_capacity: int = 32 * 1024
    l1_assoc: int = 8
    l1_latency: int = 4
    l2_capacity: int = 256 * 1024
    l2_assoc: int = 8
    l2_latency: int = 12
    l3_capacity: int = 25 * 1024 * 1024
    l3_assoc: int = 20
    l3_latency: int = 40
    mem_latency: int = 150
    mshr: int = 10
    prefetch_enabled: bool = True
    prefetch_degree: int = 2
    prefetch_trigger_d: int = 2048
    fully_associative: bool = False
    compute_cycles: int = 1

    def __post_init__(self) -> None:
        ls = self.line_size
        if ls < 1 or ls & (ls - 1):
            raise ParameterError("line_size must be a power of two")
        caps = (self.l1_capacity, self.l2_capacity, self.l3_capacity)
        if not caps[0] < caps[1] < caps[2]:
            raise ParameterError("cache capacities must strictly increase by level")
        lats = (self.l1_latency, self.l2_latency, self.l3_latency, self.mem_latency)
        if not 0 < lats[0] < lats[1] < lats[2] < lats[3]:
            raise ParameterError("latencies must be positive and strictly increase by level")
        for name, cap, ways in zip(("l1", "l2", "l3"), caps, (self.l1_assoc, self.l2_assoc, self.l3_assoc)):
            if cap % ls:
                raise ParameterError(f"{name}_capacity must be a multiple of line_size")
            if not self.fully_associative:
                if ways < 1 or (cap // ls) % ways:
                    raise ParameterError(f"{name}: line count must be divisible by associativity")
        if self.mshr < 1:
            raise ParameterError("mshr must be >= 1")
        if self.prefetch_degree < 0 or self.prefetch_trigger_d < 0:
            raise ParameterError("prefetch_degree and prefetch_trigger_d must be >= 0")
        if self.compute_cycles < 0:
            raise ParameterError("compute_cycles must be >= 0")

    def geometry(self, level: int) -> tuple[int, int]:
        """``(sets, ways)`` of cache ``level`` (1-based)."""
        cap = (self.l1_capacity, self.l2_capacity, self.l3_capacity)[level - 1]
        lines = cap // self.line_size
        if self.fully_associative:
            return 1, lines
        ways = (self.l1_assoc, self.l2_assoc, self.l3_assoc)[level - 1]
        return lines // ways, ways


@dataclass
class LevelCounters:
    hits: int = 0
    misses: int = 0
    demand_requests: int = 0
    prefetch_requests: int = 0


@dataclass
class SimCounters:
    l1: LevelCounters = field(default_factory=LevelCounters)
    l2: LevelCounters = field(default_factory=LevelCounters)
    l3: LevelCounters = field(default_factory=LevelCounters)
    offchip_movements: int = 0
    total_cycles: int = 0
    stall_cycles: int = 0
    mem_active_cycles: int = 0
    l2_beyond_active_cycles: int = 0
    l3_active_cycles: int = 0
    l3_accesses_completed: int = 0
    mlp_avg: float = 0.0
    records: int = 0

    def rows(self) -> list[tuple[str, int | float]]:
        out: list[tuple[str, int | float]] = []
        for lvl in ("l1", "l2", "l3"):
            for k, v in asdict(getattr(self, lvl)).items():
                out.append((f"{lvl}_{k}", v))
        for f in fields(self):
            if f.name not in ("l1", "l2", "l3"):
                out.append((f.name, getattr(self, f.name)))
        return out

    @classmethod
    def from_rows(cls, values: Mapping[str, str | int | float]) -> "SimCounters":
        out = cls()
        expected = {name for name, _ in out.rows()}
        missing = expected - set(values)
        if missing:
            raise ParameterError(f"counter table lacks {', '.join(sorted(missing))}")
        for lvl in ("l1", "l2", "l3"):
            lc = getattr(out, lvl)
            for f in fields(LevelCounters):
                setattr(lc, f.name, _int(values[f"{lvl}_{f.name}"], f"{lvl}_{f.name}"))
        for f in fields(cls):
            if f.name in ("l1", "l2", "l3"):
                continue
            raw = values[f.name]
            setattr(out, f.name, float(raw) if f.name == "mlp_avg" else _int(raw, f.name))
        return out

    def violations(self) -> list[str]:
        bad = []
        for lvl in ("l1", "l2", "l3"):
            c = getattr(self, lvl)
            if c.hits + c.misses != c.demand_requests + c.prefetch_requests:
                bad.append(f"{lvl}: hits + misses != requests")
            if min(c.hits, c.misses, c.demand_requests, c.prefetch_requests) < 0:
                bad.append(f"{lvl}: negative counter")
        for name, v in self.rows():
            if v < 0:
                bad.append(f"{name} < 0")
        if self.stall_cycles > self.total_cycles:
            bad.append("stall_cycles > total_cycles")
        return bad


def _int(v, name: str) -> int:
    try:
        f = float(v)
    except (TypeError, ValueError):
        raise ParameterError(f"counter {name}: {v!r} is not a number") from None
    if f != int(f):
        raise ParameterError(f"counter {name}: {v!r} is not an integer")
    return int(f)


def _line_spans(t: Trace, line_size: int) -> tuple[list[int], list[int]]:
    shift = np.uint64(line_size.bit_length() - 1)
    first = t.addr >> shift
    last = (t.addr + (np.maximum(t.size, 1).astype(np.uint64) - np.uint64(1))) >> shift
    return first.tolist(), last.tolist()


class _Union:
    """Length of the union of intervals fed in non-decreasing start order."""

    __slots__ = ("until", "total")

    def __init__(self) -> None:
        self.until = 0
        self.total = 0

    def add(self, start: int, end: int) -> None:
        if end <= self.until:
            return
        self.total += end - max(start, self.until)
        self.until = end


def simulate(t: Trace, cfg: HierarchyConfig | None = None) -> SimCounters:
    cfg = cfg or HierarchyConfig()
    out = SimCounters(records=len(t))
    c1, c2, c3 = out.l1, out.l2, out.l3

    (n1, w1), (n2, w2), (n3, w3) = cfg.geometry(1), cfg.geometry(2), cfg.geometry(3)
    sets1 = [{} for _ in range(n1)]
    sets2 = [{} for _ in range(n2)]  # line -> True while it holds an unused prefetch
    sets3 = [{} for _ in range(n3)]

    lat1, lat2, lat3, latm = cfg.l1_latency, cfg.l2_latency, cfg.l3_latency, cfg.mem_latency
    compute = cfg.compute_cycles
    mshr = cfg.mshr
    pf_on = cfg.prefetch_enabled and cfg.prefetch_degree > 0
    pf_degree = cfg.prefetch_degree
    pf_reach = cfg.prefetch_trigger_d // cfg.line_size
    last_event: int | None = None

    now = 0
    stall = 0
    inflight: list[int] = []  # completion times of outstanding L1 misses
    pending: dict[int, int] = {}  # line -> fill completion time
    mem_act, l2b_act, l3_act = _Union(), _Union(), _Union()
    l3_done = 0
    l3_busy = 0
    offchip = 0

    def fill(sets, nsets, ways, line, value):
        s = sets[line % nsets]
        if len(s) >= ways:
            del s[next(iter(s))]
        s[line] = value

    def prefetch(line: int) -> None:
        nonlocal offchip
        if line < 0:
            return
        c2.prefetch_requests += 1
        s2 = sets2[line % n2]
        if line in s2:
            c2.hits += 1
            return
        c2.misses += 1
        c3.prefetch_requests += 1
        s3 = sets3[line % n3]
        if line in s3:
            c3.hits += 1
            s3[line] = s3.pop(line)
        else:
            c3.misses += 1
            offchip += 1
            fill(sets3, n3, w3, line, None)
        fill(sets2, n2, w2, line, True)

    first, last = _line_spans(t, cfg.line_size)
    writes = t.is_write.tolist()

    for lo, hi, is_write in zip(first, last, writes):
        for line in range(lo, hi + 1):
            while inflight and inflight[0] <= now:
                heapq.heappop(inflight)
            c1.demand_requests += 1
            s1 = sets1[line % n1]
            if line in s1:
                c1.hits += 1
                s1[line] = s1.pop(line)
                if is_write:
                    ready = pending.get(line, 0)
                    if ready > now:
                        stall += ready - now
                        now = ready
                mem_act.add(now, now + lat1)
                now += lat1 + compute
                continue

            c1.misses += 1
            c2.demand_requests += 1
            s2 = sets2[line % n2]
            if line in s2:
                c2.hits += 1
                was_prefetched = s2.pop(line)
                s2[line] = False
                lat = lat2
                trains = was_prefetched
            else:
                c2.misses += 1
                c3.demand_requests += 1
                s3 = sets3[line % n3]
                if line in s3:
                    c3.hits += 1
                    s3[line] = s3.pop(line)
                    lat = lat3
                else:
                    c3.misses += 1
                    offchip += 1
                    fill(sets3, n3, w3, line, None)
                    lat = latm
                fill(sets2, n2, w2, line, False)
                trains = True

            if pf_on and trains:
                if last_event is not None:
                    delta = line - last_event
                    if delta and abs(delta) <= pf_reach:
                        step = 1 if delta > 0 else -1
                        for k in range(1, pf_degree + 1):
                            prefetch(line + step * k)
                last_event = line
            fill(sets1, n1, w1, line, None)

            if len(inflight) >= mshr:
                ready = heapq.heappop(inflight)
                stall += ready - now
                now = ready
                while inflight and inflight[0] <= now:
                    heapq.heappop(inflight)
            done = now + lat
            heapq.heappush(inflight, done)
            pending[line] = done
            mem_act.add(now, done)
            l2b_act.add(now, done)
            if lat >= lat3:
                l3_act.add(now, done)
                l3_done += 1
                l3_busy += lat
            now += lat1 + compute

    end = max([now, *inflight])
    stall += end - now

    out.offchip_movements = offchip
    out.total_cycles = end
    out.stall_cycles = stall
    out.mem_active_cycles = mem_act.total
    out.l2_beyond_active_cycles = l2b_act.total
    out.l3_active_cycles = l3_act.total
    out.l3_accesses_completed = l3_done
    out.mlp_avg = l3_busy / l3_act.total if l3_act.total else 0.0
    return out


def reference_lru(t: Trace, capacity_lines: int, line_size: int = 64) -> tuple[int, int]:
    """Hit/miss counts of one fully associative LRU cache, the slow obvious way.

    Kept deliberately naive (a recency list scanned front to back) so it can
    serve as an independent check on :func:`simulate`.
    """
    if len(t) > REFERENCE_LRU_MAX:
        raise ParameterError(f"reference_lru accepts at most {REFERENCE_LRU_MAX} records")
    if capacity_lines < 1:
        raise ParameterError("capacity_lines must be >= 1")
    recency: list[int] = []  # least recent first
    hits = misses = 0
    for rec in t:
        start = rec.addr // line_size
        end = (rec.addr + max(rec.size, 1) - 1) // line_size
        for line in range(start, end + 1):
            if line in recency:
                hits += 1
                recency.remove(line)
            else:
                misses += 1
                if len(recency) == capacity_lines:
                    del recency[0]
            recency.append(line)
    return hits, misses
