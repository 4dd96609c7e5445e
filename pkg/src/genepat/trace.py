"""Trace data model: records, traces, validation and windowing.

A :class:`Trace` stores its records column-wise in numpy arrays so that
million-record traces stay cheap to generate and analyse.  Iterating a trace
yields :class:`TraceRecord` tuples for code that prefers a row view.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import ParameterError

MIN_WINDOW = 64
MAX_ACCESS_SIZE = 4096
ADDR_MAX = 2**64 - 1


class TraceRecord(NamedTuple):
    seq: int
    addr: int
    op: str  # "R" or "W"
    size: int

    @property
    def is_write(self) -> bool:
        return self.op == "W"


@dataclass(eq=False)
class Trace:
    """An ordered, single-stream sequence of memory accesses.

    ``segments`` optionally records which generator produced which record
    range, as ``(label, start, stop)`` triples; analysis code never reads it,
    tests use it as ground truth.
    """

    addr: np.ndarray
    is_write: np.ndarray
    size: np.ndarray
    seq: np.ndarray | None = None
    origin: str = ""
    segments: tuple[tuple[str, int, int], ...] = ()

    def __post_init__(self) -> None:
        self.addr = np.ascontiguousarray(self.addr, dtype=np.uint64)
        n = self.addr.shape[0]
        self.is_write = np.ascontiguousarray(self.is_write, dtype=bool)
        self.size = np.ascontiguousarray(self.size, dtype=np.int64)
        if self.seq is None:
            self.seq = np.arange(n, dtype=np.int64)
        else:
            self.seq = np.ascontiguousarray(self.seq, dtype=np.int64)
        if not (self.is_write.shape[0] == self.size.shape[0] == self.seq.shape[0] == n):
            raise ParameterError("trace columns have different lengths")

    @classmethod
    def from_records(cls, records: Iterable[TraceRecord | tuple], origin: str = "") -> "Trace":
        rows = [TraceRecord(*r) for r in records]
        for r in rows:
            if not 0 <= r.addr <= ADDR_MAX:
                raise ParameterError(f"address {r.addr:#x} outside the 64-bit range")
            if r.op not in ("R", "W"):
                raise ParameterError(f"op must be 'R' or 'W', got {r.op!r}")
        return cls(
            addr=np.array([r.addr for r in rows], dtype=np.uint64),
            is_write=np.array([r.op == "W" for r in rows], dtype=bool),
            size=np.array([r.size for r in rows], dtype=np.int64),
            seq=np.array([r.seq for r in rows], dtype=np.int64),
            origin=origin,
        )

    def __len__(self) -> int:
        return int(self.addr.shape[0])

    def __getitem__(self, i: int) -> TraceRecord:
        return TraceRecord(
            int(self.seq[i]), int(self.addr[i]), "W" if self.is_write[i] else "R", int(self.size[i])
        )

    def __iter__(self) -> Iterator[TraceRecord]:
        ops = np.where(self.is_write, "W", "R")
        for s, a, o, z in zip(self.seq.tolist(), self.addr.tolist(), ops.tolist(), self.size.tolist()):
            yield TraceRecord(s, a, o, z)

    @property
    def records(self) -> list[TraceRecord]:
        return list(self)

    def slice(self, start: int, stop: int) -> "Trace":
        return Trace(
            self.addr[start:stop],
            self.is_write[start:stop],
            self.size[start:stop],
            np.arange(stop - start, dtype=np.int64),
            origin=self.origin,
        )

    def same_content(self, other: "Trace") -> bool:
        return (
            np.array_equal(self.addr, other.addr)
            and np.array_equal(self.is_write, other.is_write)
            and np.array_equal(self.size, other.size)
            and np.array_equal(self.seq, other.seq)
        )


@dataclass(frozen=True)
class Window:
    start: int
    length: int
    parent: Trace = field(repr=False, compare=False)

    @property
    def stop(self) -> int:
        return self.start + self.length

    @property
    def addr(self) -> np.ndarray:
        return self.parent.addr[self.start:self.stop]

    def __len__(self) -> int:
        return self.length


@dataclass(frozen=True)
class Violation:
    index: int  # -1 for trace-level problems
    field: str
    reason: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def validate_trace(t: Trace) -> ValidationReport:
    """Check every record invariant and report all failures; never raises."""
    n = len(t)
    if n == 0:
        return ValidationReport(False, (Violation(-1, "records", "empty trace"),))

    found: list[Violation] = []
    if t.seq[0] != 0:
        found.append(Violation(0, "seq", f"first seq is {int(t.seq[0])}, expected 0"))
    bad_seq = np.flatnonzero(np.diff(t.seq) != 1) + 1
    for i in bad_seq.tolist():
        found.append(Violation(i, "seq", f"seq {int(t.seq[i])} does not follow {int(t.seq[i - 1])}"))

    for i in np.flatnonzero(t.size < 1).tolist():
        found.append(Violation(i, "size", f"size {int(t.size[i])} < 1"))
    for i in np.flatnonzero(t.size > MAX_ACCESS_SIZE).tolist():
        found.append(Violation(i, "size", f"size {int(t.size[i])} > {MAX_ACCESS_SIZE}"))

    ok_size = t.size >= 1
    # addr + size must not exceed 2**64, i.e. addr <= 2**64 - size
    limit = np.uint64(ADDR_MAX) - (np.clip(t.size, 1, None).astype(np.uint64) - np.uint64(1))
    for i in np.flatnonzero(ok_size & (t.addr > limit)).tolist():
        found.append(Violation(i, "addr", "addr + size overflows the 64-bit address space"))

    found.sort(key=lambda v: (v.index, v.field))
    return ValidationReport(not found, tuple(found))


def window_trace(
    t: Trace, window_len: int, stride: int, min_window: int = MIN_WINDOW
) -> list[Window]:
    """Tile ``t`` into windows of ``window_len`` records starting every ``stride``.

    A trailing partial window is kept when it has at least ``min_window``
    records, otherwise it is folded into the preceding window.  A trace shorter
    than ``window_len`` (but at least ``min_window``) yields a single window.
    """
    if window_len < min_window:
        raise ParameterError(f"window_len {window_len} < min_window {min_window}")
    if stride < 1:
        raise ParameterError("stride must be >= 1")
    n = len(t)
    if n < min_window:
        raise ParameterError(f"trace of {n} records is shorter than min_window {min_window}")
    if n <= window_len:
        return [Window(0, n, t)]

    starts = list(range(0, n - window_len + 1, stride))
    windows = [Window(s, window_len, t) for s in starts]
    tail = starts[-1] + stride
    covered = starts[-1] + window_len
    if covered < n:
        if n - tail >= min_window:
            windows.append(Window(tail, n - tail, t))
        else:
            last = windows[-1]
            windows[-1] = Window(last.start, n - last.start, t)
    return windows


def concat(traces: Sequence[Trace], origin: str = "") -> Trace:
    return Trace(
        np.concatenate([x.addr for x in traces]),
        np.concatenate([x.is_write for x in traces]),
        np.concatenate([x.size for x in traces]),
        origin=origin,
    )
