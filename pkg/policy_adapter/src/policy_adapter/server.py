"""Protocol server: scene patches in, actions and verdicts out.

One connection is serviced at a time.  Per episode the peer sends reset
(task id, scene patch text, instruction), then streams observations; the
adapter applies the patch to a scratch copy of the native assets, builds
an environment, asks the policy for an action per observation, and steps
the environment until it reports done, at which point the adapter replies
with the verdict and the step count.

The policy sees exactly the bytes that crossed the wire: camera views are
handed over as the decoded PNG byte strings, untouched, so byte-level
forwarding can be verified end to end.  Malformed traffic gets a terminal
error reply and the connection is closed; the adapter never hangs a peer
that enforces its own receive timeout.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import math
import socket
import struct
import time
from dataclasses import dataclass

from . import wire
from .binding import PatchBinding, apply_patch_native
from .errors import AdapterError, WireError

ACTION_DIM = 7


@dataclass(frozen=True)
class StepOutcome:
    done: bool
    success: bool


class StubEnv:
    """Simulator stand-in: succeeds after a fixed number of steps.

    step_delay_s stalls each step, which is how tests and drills simulate
    a wedged simulator behind the adapter.
    """

    def __init__(self, task_id, instruction, succeed_after=3, step_delay_s=0.0, scene_dir=None):
        self.task_id = task_id
        self.instruction = instruction
        self.scene_dir = scene_dir
        self._succeed_after = int(succeed_after)
        self._delay = float(step_delay_s)
        self._steps = 0

    def step(self, action) -> StepOutcome:
        if self._delay > 0.0:
            time.sleep(self._delay)
        self._steps += 1
        done = self._steps >= self._succeed_after
        return StepOutcome(done=done, success=done)


def checksum_policy(obs) -> tuple:
    """Reference policy: the action is a digest of the observation bytes.

    Feeds sorted view names with their raw PNG bytes and the state values
    as little-endian float64 into SHA-256; the first seven digest bytes,
    scaled to [0, 1], become the action.  A peer can recompute the digest
    from what it sent and verify the observation arrived byte-identical.
    """
    h = hashlib.sha256()
    for name in sorted(obs["views"]):
        h.update(name.encode("utf-8"))
        h.update(obs["views"][name])
    for value in obs["state"]:
        h.update(struct.pack("<d", value))
    digest = h.digest()
    return tuple(digest[i] / 255.0 for i in range(ACTION_DIM))


def _decode_obs(msg) -> tuple[dict, tuple]:
    views = {}
    raw_views = msg.get("views")
    if not isinstance(raw_views, dict):
        raise WireError("obs message must carry a views mapping")
    for name, blob in raw_views.items():
        try:
            views[name] = base64.b64decode(blob, validate=True)
        except (binascii.Error, TypeError) as exc:
            raise WireError(f"view {name!r} is not valid base64: {exc}") from exc
    try:
        state = tuple(float(v) for v in msg.get("state", ()))
    except (TypeError, ValueError) as exc:
        raise WireError(f"obs state is not numeric: {exc}") from exc
    return views, state


def _check_action(action):
    values = tuple(float(v) for v in action)
    if len(values) != ACTION_DIM:
        raise AdapterError(f"policy returned {len(values)} values, expected {ACTION_DIM}")
    if any(not math.isfinite(v) for v in values):
        raise AdapterError("policy returned a non-finite action value")
    return values


class AdapterServer:
    """Serves the wire protocol for one env factory and one policy.

    env_factory(task_id, instruction, scene_dir) must return an object
    with step(action) -> StepOutcome.  scene_dir is the scratch copy of
    the native assets with the episode's patch applied, or None when the
    server was built without an asset root.
    """

    def __init__(self, env_factory, policy, asset_root=None, binding: PatchBinding | None = None):
        if (asset_root is None) != (binding is None):
            raise AdapterError("asset_root and binding must be given together")
        self._env_factory = env_factory
        self._policy = policy
        self._asset_root = asset_root
        self._binding = binding

    # -- one connection ----------------------------------------------------

    def handle(self, rfile, wfile) -> None:
        def reply(doc):
            wfile.write(wire.encode(doc))
            wfile.flush()

        def fail(message):
            try:
                reply({"type": "error", "error": message})
            except OSError:
                pass

        try:
            self._session(rfile, reply, fail)
        except OSError:
            pass  # peer went away mid-reply; no one left to tell
        except AdapterError as exc:
            fail(str(exc))
        except Exception as exc:  # crash isolation: close, never hang
            fail(f"internal adapter error: {exc}")

    def _session(self, rfile, reply, fail) -> None:
        line = rfile.readline()
        if not line:
            return
        try:
            msg = wire.decode(line)
        except WireError as exc:
            fail(str(exc))
            return
        if msg["type"] != "hello":
            fail(f"expected hello, got {msg['type']!r}")
            return
        if msg.get("version") != wire.PROTOCOL_VERSION:
            fail(f"unsupported protocol version {msg.get('version')!r}")
            return
        reply({"type": "hello", "version": wire.PROTOCOL_VERSION})

        env = None
        steps = 0
        task_id = ""
        instruction = ""
        while True:
            line = rfile.readline()
            if not line:
                return
            try:
                msg = wire.decode(line)
            except WireError as exc:
                fail(str(exc))
                return
            kind = msg["type"]
            if kind == "hello":
                reply({"type": "hello", "version": wire.PROTOCOL_VERSION})
            elif kind == "reset":
                task_id = str(msg.get("task_id", ""))
                instruction = str(msg.get("instruction", ""))
                scene_dir = None
                if self._asset_root is not None:
                    try:
                        scene_dir = apply_patch_native(
                            self._asset_root, msg.get("scene_patch") or "", self._binding
                        )
                    except AdapterError as exc:
                        fail(f"scene patch rejected: {exc}")
                        return
                env = self._env_factory(task_id, instruction, scene_dir)
                steps = 0
            elif kind == "obs":
                if env is None:
                    fail("obs before reset")
                    return
                try:
                    views, state = _decode_obs(msg)
                except WireError as exc:
                    fail(str(exc))
                    return
                obs = {
                    "task_id": task_id,
                    "instruction": instruction,
                    "views": views,
                    "state": state,
                }
                values = _check_action(self._policy(obs))
                outcome = env.step(values)
                steps += 1
                if outcome.done:
                    reply({"type": "done", "success": bool(outcome.success), "steps": steps})
                    env = None
                else:
                    reply({"type": "action", "values": list(values)})
            else:
                fail(f"unexpected message type {kind!r}")
                return

    # -- transports ----------------------------------------------------------

    def serve_tcp(self, host, port, ready=None, max_connections=None) -> None:
        """Accept and service connections in sequence, one at a time."""
        with socket.create_server((host, port)) as server:
            if ready is not None:
                ready(server.getsockname())
            served = 0
            while max_connections is None or served < max_connections:
                conn, _ = server.accept()
                with conn:
                    rfile = conn.makefile("rb")
                    wfile = conn.makefile("wb")
                    try:
                        self.handle(rfile, wfile)
                    finally:
                        rfile.close()
                        wfile.close()
                served += 1

    def serve_stdio(self, stdin, stdout) -> None:
        """Service a single session over binary stdio streams."""
        self.handle(stdin, stdout)
