"""Reading and writing traces.

Text format, one record per line::

    seq,addr_hex,op,size        e.g.  17,7f3a00,R,8

Binary format: ``b"GPTR"``, a version byte (1), then packed little-endian
records of ``addr:u64, flags:u8 (bit0 = write), size:u16``.  Sequence numbers
are implicit in record order.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import BinaryIO, TextIO

import numpy as np

from .errors import ParameterError, TraceFormatError
from .trace import ADDR_MAX, Trace

MAGIC = b"GPTR"
VERSION = 1
RECORD_DTYPE = np.dtype([("addr", "<u8"), ("flags", "u1"), ("size", "<u2")])


def format_text(t: Trace) -> str:
    ops = np.where(t.is_write, "W", "R").tolist()
    lines = [
        f"{s},{a:x},{o},{z}"
        for s, a, o, z in zip(t.seq.tolist(), t.addr.tolist(), ops, t.size.tolist())
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_text(stream: TextIO, origin: str = "") -> Trace:
    seqs, addrs, writes, sizes = [], [], [], []
    for lineno, raw in enumerate(stream, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise TraceFormatError(f"{origin}:{lineno}: expected 4 fields, got {len(parts)}")
        s, a, o, z = (p.strip() for p in parts)
        try:
            seq = int(s)
            addr = int(a, 16)
            size = int(z)
        except ValueError as exc:
            raise TraceFormatError(f"{origin}:{lineno}: {exc}") from None
        if a.lower().startswith("0x") or a.startswith("-"):
            raise TraceFormatError(f"{origin}:{lineno}: address must be bare hex, got {a!r}")
        if addr > ADDR_MAX:
            raise TraceFormatError(f"{origin}:{lineno}: address {a} exceeds 64 bits")
        if o not in ("R", "W"):
            raise TraceFormatError(f"{origin}:{lineno}: op must be R or W, got {o!r}")
        seqs.append(seq)
        addrs.append(addr)
        writes.append(o == "W")
        sizes.append(size)
    return Trace(
        np.array(addrs, dtype=np.uint64),
        np.array(writes, dtype=bool),
        np.array(sizes, dtype=np.int64),
        np.array(seqs, dtype=np.int64),
        origin=origin,
    )


def to_binary(t: Trace) -> bytes:
    if len(t) and (t.size.min() < 0 or t.size.max() > 0xFFFF):
        raise TraceFormatError("record size does not fit the 16-bit binary field")
    rec = np.empty(len(t), dtype=RECORD_DTYPE)
    rec["addr"] = t.addr
    rec["flags"] = t.is_write.astype(np.uint8)
    rec["size"] = t.size.astype(np.uint16)
    return MAGIC + bytes([VERSION]) + rec.tobytes()


def parse_binary(data: bytes, origin: str = "") -> Trace:
    if data[:4] != MAGIC:
        raise TraceFormatError(f"{origin}: bad magic {data[:4]!r}")
    if len(data) < 5 or data[4] != VERSION:
        raise TraceFormatError(f"{origin}: unsupported binary trace version")
    body = data[5:]
    if len(body) % RECORD_DTYPE.itemsize:
        raise TraceFormatError(
            f"{origin}: truncated record ({len(body)} bytes is not a multiple of {RECORD_DTYPE.itemsize})"
        )
    rec = np.frombuffer(body, dtype=RECORD_DTYPE)
    if np.any(rec["flags"] & 0xFE):
        raise TraceFormatError(f"{origin}: reserved flag bits set")
    return Trace(
        rec["addr"].copy(),
        (rec["flags"] & 1).astype(bool),
        rec["size"].astype(np.int64),
        origin=origin,
    )


def read_trace(path: str | Path | BinaryIO) -> Trace:
    """Load a trace, detecting the binary format by its magic bytes."""
    if hasattr(path, "read"):
        data = path.read()
        origin = getattr(path, "name", "<stream>")
    else:
        origin = str(path)
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise TraceFormatError(f"{origin}: {exc.strerror}") from None
    if isinstance(data, str):
        data = data.encode()
    if data[:4] == MAGIC:
        return parse_binary(data, origin)
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError:
        raise TraceFormatError(f"{origin}: not a text trace and no binary magic") from None
    return parse_text(io.StringIO(text), origin)


def write_trace(t: Trace, path: str | Path, fmt: str = "text") -> None:
    if fmt == "text":
        Path(path).write_text(format_text(t))
    elif fmt == "binary":
        Path(path).write_bytes(to_binary(t))
    else:
        raise ParameterError(f"unknown trace format {fmt!r}")
