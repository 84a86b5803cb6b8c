"""Canonical JSON serialization shared by every file format.

All artifacts (grid, fleet, plan, scenario, result, report) are written
through dumps() so that identical structures always produce identical
bytes: fixed key order (insertion order of the dicts we build), two-space
indent, trailing newline, and floats quantized to 6 significant digits.
Quantization is idempotent, so load -> dump reproduces a file byte for
byte.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Iterable, Mapping

from .errors import SchemaError

FORMAT_VERSION = "1"


def quantize(value: float) -> float:
    """Round to 6 significant digits; idempotent and repr-stable."""
    if value == 0:
        return 0.0
    return float(f"{value:.6g}")


def _quantized(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        return quantize(obj)
    if isinstance(obj, dict):
        return {k: _quantized(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_quantized(v) for v in obj]
    return obj


def dumps(obj: Mapping[str, Any]) -> str:
    return json.dumps(_quantized(obj), indent=2, allow_nan=False) + "\n"


def dump_path(obj: Mapping[str, Any], path: str | Path) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def digest(obj: Mapping[str, Any]) -> str:
    """SHA-256 hex digest of the canonical serialization."""
    return hashlib.sha256(dumps(obj).encode("utf-8")).hexdigest()


def load_path(path: str | Path) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read file: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def check_version(obj: Mapping[str, Any], ctx: str) -> None:
    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        raise SchemaError(f"{ctx}: unsupported format_version {version!r} (expected {FORMAT_VERSION!r})")


def require_keys(obj: Any, required: Iterable[str], optional: Iterable[str], ctx: str) -> None:
    """Reject missing required keys and any key outside required|optional."""
    if not isinstance(obj, dict):
        raise SchemaError(f"{ctx}: expected an object, got {type(obj).__name__}")
    required = set(required)
    allowed = required | set(optional)
    missing = sorted(required - obj.keys())
    if missing:
        raise SchemaError(f"{ctx}: missing required field(s) {', '.join(missing)}")
    unknown = sorted(obj.keys() - allowed)
    if unknown:
        raise SchemaError(f"{ctx}: unknown field(s) {', '.join(unknown)}")


def get_number(obj: Mapping[str, Any], key: str, ctx: str) -> float:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{ctx}.{key}: expected a number, got {type(value).__name__}")
    return float(value)


def get_string(obj: Mapping[str, Any], key: str, ctx: str) -> str:
    value = obj[key]
    if not isinstance(value, str):
        raise SchemaError(f"{ctx}.{key}: expected a string, got {type(value).__name__}")
    return value


def get_vector(obj: Mapping[str, Any], key: str, length: int, ctx: str) -> tuple[float, ...]:
    value = obj[key]
    if not isinstance(value, list) or len(value) != length:
        raise SchemaError(f"{ctx}.{key}: expected a list of {length} numbers")
    out = []
    for i, item in enumerate(value):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise SchemaError(f"{ctx}.{key}[{i}]: expected a number, got {type(item).__name__}")
        out.append(float(item))
    return tuple(out)
