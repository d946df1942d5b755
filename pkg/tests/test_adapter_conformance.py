"""Wire-level conformance checks against the external policy adapter.

The adapter is a separate package; these tests talk to it only through a
subprocess boundary using the line protocol and patch text format, the
same way a real simulator bridge would be driven.
"""

import hashlib
import json
import os
import re
import struct
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from perturbench.corrupt import Image
from perturbench.errors import ProtocolError, TransportError
from perturbench.harness.protocol import AdapterClient, connect_tcp, png_bytes
from perturbench.patch import ScenePatch, diff, dumps as patch_dumps
from perturbench.sceneops import LightPerturbParams, perturb_light

from factories import make_scene

REPO_ROOT = Path(__file__).resolve().parents[1]
ADAPTER_SRC = REPO_ROOT / "policy_adapter" / "src"

pytestmark = pytest.mark.skipif(
    not (ADAPTER_SRC / "policy_adapter").is_dir(),
    reason="policy adapter package not present",
)


def adapter_env():
    env = dict(os.environ)
    env["PYTHONPATH"] = str(ADAPTER_SRC) + os.pathsep + env.get("PYTHONPATH", "")
    return env


def launch_adapter(*args):
    proc = subprocess.Popen(
        [sys.executable, "-m", "policy_adapter",
         "--endpoint", "127.0.0.1:0", "--connections", "1", *args],
        env=adapter_env(), stderr=subprocess.PIPE,
    )
    line = proc.stderr.readline().decode("utf-8", "replace")
    match = re.search(r"listening on ([0-9.]+):(\d+)", line)
    if match is None:
        proc.kill()
        rest = proc.stderr.read().decode("utf-8", "replace")
        raise RuntimeError(f"adapter did not announce a port: {line!r}\n{rest}")
    return proc, match.group(1), int(match.group(2))


def write_demo_assets(target: Path) -> Path:
    subprocess.run(
        [sys.executable, "-m", "policy_adapter",
         "--write-demo-assets", str(target)],
        env=adapter_env(), check=True, capture_output=True,
    )
    return target


def sample_views():
    rng = np.random.default_rng(7)
    return {
        name: Image.from_array(
            rng.integers(0, 256, size=(40, 48, 3), dtype=np.uint8)
        )
        for name in ("front", "wrist")
    }


def expected_digest_action(views, state):
    # mirrors the adapter's documented digest contract, recomputed locally
    h = hashlib.sha256()
    for name in sorted(views):
        h.update(name.encode("utf-8"))
        h.update(png_bytes(views[name]))
    for value in state:
        h.update(struct.pack("<d", float(value)))
    digest = h.digest()
    return tuple(digest[i] / 255.0 for i in range(7))


def diffuse_patch_text() -> str:
    scene = make_scene("conformance-0", "spatial")
    lights = scene.lights
    patched, patch = perturb_light(
        scene,
        LightPerturbParams(
            diffuse=(0.42, 0.4, 0.4),
            direction=lights.direction,
            specular=lights.specular,
            shadows=lights.shadows,
        ),
    )
    assert patch.paths == ("lights.diffuse",)
    return patch_dumps(patch)


def test_conformance_full_cycle_byte_identical(tmp_path):
    start = time.monotonic()
    assets = write_demo_assets(tmp_path / "assets")
    proc, host, port = launch_adapter(
        "--asset-root", str(assets),
        "--binding", str(assets / "binding.json"),
        "--stub-steps", "3",
    )
    try:
        client = AdapterClient(connect_tcp(host, port, timeout=10.0))
        client.handshake()
        client.reset("conformance-0", diffuse_patch_text(), "pick up the mug")
        views = sample_views()
        state = (0.25, -0.5, 1.0, 0.0)
        expected = expected_digest_action(views, state)
        for _ in range(2):
            kind, values = client.exchange(views, state)
            assert kind == "action"
            assert values == expected  # proves the PNG bytes arrived untouched
        reply = client.exchange(views, state)
        assert reply == ("done", True, 3)
        client.close()
        assert proc.wait(timeout=30) == 0
    finally:
        proc.kill()
    print(f"[PASS] adapter full cycle: done(True, 3), action == local digest "
          f"of sent bytes [{time.monotonic() - start:.2f}s]")


def test_conformance_unbound_patch_rejected(tmp_path):
    start = time.monotonic()
    assets = write_demo_assets(tmp_path / "assets")
    proc, host, port = launch_adapter(
        "--asset-root", str(assets),
        "--binding", str(assets / "binding.json"),
    )
    try:
        client = AdapterClient(connect_tcp(host, port, timeout=10.0))
        client.handshake()
        bad = patch_dumps(ScenePatch(edits=(
            ("objects.0.position", [0.08, -0.05, 0.02], [0.2, -0.05, 0.02]),
        )))
        client.reset("conformance-1", bad, "pick up the mug")
        with pytest.raises((ProtocolError, TransportError)):
            client.exchange(sample_views(), (0.0,))
        client.close()
    finally:
        proc.kill()
    print(f"[PASS] adapter rejects unbindable patch paths; episode refused "
          f"[{time.monotonic() - start:.2f}s]")


def test_conformance_hung_adapter_times_out():
    start = time.monotonic()
    proc, host, port = launch_adapter("--stub-delay", "10", "--stub-steps", "1")
    try:
        client = AdapterClient(connect_tcp(host, port, timeout=0.5))
        client.handshake()
        client.reset("conformance-2", "", "pick up the mug")
        waited = time.monotonic()
        with pytest.raises(TransportError, match="timed out"):
            client.exchange(sample_views(), (0.0,))
        elapsed = time.monotonic() - waited
        assert elapsed < 5.0, f"timeout took {elapsed:.2f}s against a 0.5s bound"
        client.close()
    finally:
        proc.kill()
    print(f"[PASS] hung adapter converted to transport error in "
          f"{time.monotonic() - start:.2f}s (0.5s receive bound)")


def test_conformance_patch_text_parses_as_adapter_json():
    # the text leaving the toolkit is the adapter's documented input shape
    doc = json.loads(diffuse_patch_text())
    assert set(doc) == {"edits"}
    (edit,) = doc["edits"]
    assert set(edit) == {"path", "old", "new"}
    assert edit["path"] == "lights.diffuse"
    assert edit["new"] == [0.42, 0.4, 0.4]
