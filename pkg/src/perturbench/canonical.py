"""Canonical text serialization for scenes, patches and result documents.

The format is a strict JSON subset with one allowed rendering per value, so
equal values always serialize to identical bytes:

* object keys sorted by code point, two-space indent;
* lists of numbers on one line, other lists one element per line;
* floats rendered with 17 significant digits (``%.17g``), enough to
  round-trip any IEEE double exactly; a ``.0`` is appended when the
  rendering would otherwise read back as an integer, so the int/float
  distinction survives a round trip;
* strings JSON-escaped but emitted as raw UTF-8 (no \\uXXXX for non-ASCII);
* non-finite floats and non-string keys are rejected;
* the document ends with a single newline.

``loads`` is plain JSON parsing, so hand-edited documents are accepted even
when their formatting is not canonical.
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Any


def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite float {x!r} has no canonical form")
    text = "%.17g" % x
    if "." not in text and "e" not in text and "n" not in text:
        text += ".0"
    return text


def _write(value: Any, out: list[str], indent: int) -> None:
    pad = "  " * indent
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, int):
        out.append(repr(value))
    elif isinstance(value, float):
        out.append(format_float(value))
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, (list, tuple)):
        if not value:
            out.append("[]")
        elif all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            out.append("[")
            for i, v in enumerate(value):
                if i:
                    out.append(", ")
                _write(v, out, indent)
            out.append("]")
        else:
            out.append("[\n")
            for i, v in enumerate(value):
                if i:
                    out.append(",\n")
                out.append(pad + "  ")
                _write(v, out, indent + 1)
            out.append("\n" + pad + "]")
    elif isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        out.append("{\n")
        for i, key in enumerate(sorted(value)):
            if not isinstance(key, str):
                raise TypeError(f"object keys must be strings, got {key!r}")
            if i:
                out.append(",\n")
            out.append(pad + "  " + json.dumps(key, ensure_ascii=False) + ": ")
            _write(value[key], out, indent + 1)
        out.append("\n" + pad + "}")
    else:
        raise TypeError(f"{type(value).__name__} has no canonical form")


def dumps(value: Any) -> str:
    out: list[str] = []
    _write(value, out, 0)
    out.append("\n")
    return "".join(out)


def loads(text: str) -> Any:
    return json.loads(text)


def dump_file(path, value: Any) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(value))


def load_file(path) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


def fingerprint(value: Any) -> str:
    """Hex SHA-256 of the canonical serialization."""
    return hashlib.sha256(dumps(value).encode("utf-8")).hexdigest()
