"""Line-delimited JSON wire protocol between harness and policy adapter.

Each message is one UTF-8 JSON object per line.  Types: hello (handshake,
carries the protocol version), reset (task id, scene patch text,
instruction), obs (named views as base64 PNG plus a state vector), action
(7 values), done (success flag and step count).  Unknown or malformed
messages raise ProtocolError; transport failures and timeouts raise
TransportError.
"""

from __future__ import annotations

import base64
import io
import json
import select
import socket
from typing import Mapping, Sequence

from ..corrupt.image import Image, read_png, write_png
from ..errors import ProtocolError, TransportError

PROTOCOL_VERSION = 1
MESSAGE_TYPES = frozenset({"hello", "reset", "obs", "action", "done"})
DEFAULT_TIMEOUT_S = 30.0


def encode_message(doc: dict) -> bytes:
    if doc.get("type") not in MESSAGE_TYPES:
        raise ProtocolError(f"unknown message type {doc.get('type')!r}")
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")


def decode_message(line: bytes) -> dict:
    try:
        doc = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"malformed message: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("type") not in MESSAGE_TYPES:
        kind = doc.get("type") if isinstance(doc, dict) else None
        raise ProtocolError(f"unknown message type {kind!r}")
    return doc


def png_bytes(image: Image) -> bytes:
    buf = io.BytesIO()
    write_png(image, buf)
    return buf.getvalue()


def image_from_png_bytes(data: bytes) -> Image:
    return read_png(io.BytesIO(data))


def encode_observation(views: Mapping[str, Image], state: Sequence[float]) -> dict:
    return {
        "type": "obs",
        "views": {
            name: base64.b64encode(png_bytes(img)).decode("ascii")
            for name, img in views.items()
        },
        "state": [float(v) for v in state],
    }


def decode_observation(doc: dict) -> tuple[dict, tuple[float, ...]]:
    if doc.get("type") != "obs":
        raise ProtocolError(f"expected obs, got {doc.get('type')!r}")
    views = {
        name: image_from_png_bytes(base64.b64decode(blob))
        for name, blob in doc.get("views", {}).items()
    }
    return views, tuple(float(v) for v in doc.get("state", ()))


class SocketTransport:
    """Line transport over a TCP socket with a receive deadline."""

    def __init__(self, sock: socket.socket, timeout: float = DEFAULT_TIMEOUT_S):
        self._sock = sock
        self._buffer = b""
        self._sock.settimeout(timeout)

    def send(self, doc: dict) -> None:
        try:
            self._sock.sendall(encode_message(doc))
        except (OSError, socket.timeout) as exc:
            raise TransportError(f"send failed: {exc}") from exc

    def recv(self) -> dict:
        while b"\n" not in self._buffer:
            try:
                chunk = self._sock.recv(65536)
            except socket.timeout as exc:
                raise TransportError("timed out waiting for peer") from exc
            except OSError as exc:
                raise TransportError(f"receive failed: {exc}") from exc
            if not chunk:
                raise TransportError("connection closed by peer")
            self._buffer += chunk
        line, self._buffer = self._buffer.split(b"\n", 1)
        return decode_message(line)

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


class PipeTransport:
    """Line transport over a binary reader/writer pair (e.g. subprocess pipes)."""

    def __init__(self, reader, writer, timeout: float | None = DEFAULT_TIMEOUT_S):
        self._reader = reader
        self._writer = writer
        self._timeout = timeout

    def send(self, doc: dict) -> None:
        try:
            self._writer.write(encode_message(doc))
            self._writer.flush()
        except (OSError, ValueError) as exc:
            raise TransportError(f"send failed: {exc}") from exc

    def recv(self) -> dict:
        if self._timeout is not None and hasattr(self._reader, "fileno"):
            try:
                ready, _, _ = select.select([self._reader], [], [], self._timeout)
            except (OSError, ValueError) as exc:
                raise TransportError(f"receive failed: {exc}") from exc
            if not ready:
                raise TransportError("timed out waiting for peer")
        line = self._reader.readline()
        if not line:
            raise TransportError("connection closed by peer")
        return decode_message(line.rstrip(b"\n") if isinstance(line, bytes) else line)

    def close(self) -> None:
        for stream in (self._reader, self._writer):
            try:
                stream.close()
            except OSError:
                pass


def connect_tcp(host: str, port: int, timeout: float = DEFAULT_TIMEOUT_S) -> SocketTransport:
    try:
        sock = socket.create_connection((host, port), timeout=timeout)
    except OSError as exc:
        raise TransportError(f"connect to {host}:{port} failed: {exc}") from exc
    return SocketTransport(sock, timeout=timeout)


class AdapterClient:
    """Harness-side endpoint: streams observations, reads actions or done."""

    def __init__(self, transport):
        self._transport = transport

    def handshake(self) -> None:
        self._transport.send({"type": "hello", "version": PROTOCOL_VERSION})
        reply = self._transport.recv()
        if reply.get("type") != "hello":
            raise ProtocolError(f"expected hello, got {reply.get('type')!r}")
        if reply.get("version") != PROTOCOL_VERSION:
            raise ProtocolError(f"unsupported protocol version {reply.get('version')!r}")

    def reset(self, task_id: str, scene_patch: str, instruction: str) -> None:
        self._transport.send({
            "type": "reset",
            "task_id": task_id,
            "scene_patch": scene_patch,
            "instruction": instruction,
        })

    def exchange(self, views: Mapping[str, Image], state: Sequence[float]):
        """Sends one observation; returns ("action", values) or ("done", success, steps)."""
        self._transport.send(encode_observation(views, state))
        reply = self._transport.recv()
        kind = reply.get("type")
        if kind == "action":
            values = tuple(float(v) for v in reply.get("values", ()))
            if len(values) != 7:
                raise ProtocolError(f"action must carry 7 values, got {len(values)}")
            return ("action", values)
        if kind == "done":
            return ("done", bool(reply.get("success")), int(reply.get("steps", 0)))
        raise ProtocolError(f"expected action or done, got {kind!r}")

    def close(self) -> None:
        self._transport.close()


class RemoteEnv:
    """Environment facade that delegates policy and verdict to an adapter.

    The local observation source provides reset(seed) and step(action) like
    any environment handle; actions come back over the wire, and the
    adapter's done message ends the episode with its verdict.
    """

    def __init__(self, client: AdapterClient, obs_source, task_id: str,
                 vector, scene_patch: str = "", instruction: str = ""):
        self.task_id = task_id
        self.vector = vector
        self._client = client
        self._source = obs_source
        self._patch = scene_patch
        self._instruction = instruction

    def reset(self, seed: int) -> dict:
        self._client.reset(self.task_id, self._patch, self._instruction)
        return self._source.reset(seed)

    def remote_step(self, obs: dict):
        """One wire exchange: ("action", values) or ("done", success, steps)."""
        return self._client.exchange(obs.get("views", {}), obs.get("state", ()))

    def step(self, action):
        return self._source.step(action)

    def close(self) -> None:
        self._client.close()
