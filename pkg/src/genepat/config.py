"""``key=value`` configuration files and their mapping onto dataclasses."""

from __future__ import annotations

import dataclasses
import types
import typing
from pathlib import Path
from typing import Any, Mapping

from .errors import ParameterError, TraceFormatError

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def parse_kv(text: str, origin: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise TraceFormatError(f"{origin}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (x.strip() for x in line.split("=", 1))
        if not key:
            raise TraceFormatError(f"{origin}:{lineno}: empty key")
        out[key.replace("-", "_").lower()] = value
    return out


def read_kv(path: str | Path) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise TraceFormatError(f"{path}: {exc.strerror}") from None
    return parse_kv(text, str(path))


def coerce(value: Any, kind: Any, key: str) -> Any:
    if not isinstance(value, str):
        return value
    try:
        if kind is bool:
            v = value.lower()
            if v in _TRUE:
                return True
            if v in _FALSE:
                return False
            raise ValueError(value)
        if kind is int:
            return int(value, 0)
        if kind is float:
            return float(value)
    except ValueError:
        raise ParameterError(f"{key}: cannot read {value!r} as {kind.__name__}") from None
    return value


def field_names(cls: type) -> set[str]:
    return {f.name for f in dataclasses.fields(cls)}


def build(cls: type, values: Mapping[str, Any], **overrides: Any):
    """Instantiate dataclass ``cls`` from the subset of ``values`` it knows about.

    Unknown keys are ignored here; callers that own the whole key space check
    for typos with :func:`unknown_keys`.
    """
    hints = typing.get_type_hints(cls)
    kwargs: dict[str, Any] = {}
    for f in dataclasses.fields(cls):
        if f.name in values:
            kind = hints.get(f.name)
            if typing.get_origin(kind) in (typing.Union, types.UnionType):
                args = [a for a in typing.get_args(kind) if a is not type(None)]
                kind = args[0] if args else str
            kwargs[f.name] = coerce(values[f.name], kind, f.name)
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return cls(**kwargs)


def unknown_keys(values: Mapping[str, Any], *classes: type) -> list[str]:
    known: set[str] = set()
    for cls in classes:
        known |= field_names(cls)
    return sorted(k for k in values if k not in known)
