"""Line-oriented JSON message codec for the evaluation wire protocol.

One UTF-8 JSON object per line.  The harness sends hello, reset, and obs;
the adapter answers with hello, action, and done, and may emit a terminal
error message before closing the connection.  This module is written
against the wire contract alone so the adapter stays independent of the
harness implementation.
"""

from __future__ import annotations

import json

from .errors import WireError

PROTOCOL_VERSION = 1

# "error" is the adapter's diagnostic terminal reply; peers that do not
# know it treat the unknown type as a protocol failure, which is the
# intended outcome either way.
MESSAGE_TYPES = frozenset({"hello", "reset", "obs", "action", "done", "error"})


def encode(doc: dict) -> bytes:
    if doc.get("type") not in MESSAGE_TYPES:
        raise WireError(f"unknown message type {doc.get('type')!r}")
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")


def decode(line: bytes) -> dict:
    try:
        doc = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise WireError(f"malformed message: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("type") not in MESSAGE_TYPES:
        kind = doc.get("type") if isinstance(doc, dict) else None
        raise WireError(f"unknown message type {kind!r}")
    return doc
