"""Episode harness: suite laws, trajectory filtering, wire protocol."""

import dataclasses
import os
import socket
import struct
import threading
import time

import numpy as np
import pytest

from perturbench import (
    EpisodeRecord,
    Image,
    PerturbationSpec,
    PerturbationVector,
    ProtocolError,
    SyntheticEnv,
    SyntheticEnvModel,
    TransportError,
    derive_seed,
    filter_trajectories,
    run_episode,
    run_suite,
)
from perturbench.harness import episodes as ep
from perturbench.harness import protocol as proto

ZERO_ACTION = (0.0,) * 7


def zero_policy(obs):
    return ZERO_ACTION


def vector_for(dim="camera", sub="sphere", level=2, seed=0):
    return PerturbationVector.of(PerturbationSpec(dim, sub, level, {}, seed))


def certain_model(rate_perturbed=0.75, rate_base=1.0):
    table = {}
    for flags in np.ndindex(*(2,) * 7):
        table[tuple(bool(f) for f in flags)] = (
            rate_base if not any(flags) else rate_perturbed
        )
    return SyntheticEnvModel(table=table)


def test_episode_success_terminates_early():
    env = SyntheticEnv("t0", PerturbationVector.none(), certain_model(rate_base=1.0))
    rec = run_episode(env, zero_policy, max_steps=50, seed=3)
    assert rec.success and rec.steps == 1
    assert rec.task_id == "t0"


def test_episode_failure_hits_step_cap():
    env = SyntheticEnv("t1", vector_for(), certain_model(rate_perturbed=0.0))
    rec = run_episode(env, zero_policy, max_steps=17, seed=3)
    assert not rec.success and rec.steps == 17


def test_episode_deterministic():
    env = SyntheticEnv("t2", vector_for(), certain_model(0.5))
    a = run_episode(env, zero_policy, max_steps=5, seed=9)
    b = run_episode(env, zero_policy, max_steps=5, seed=9)
    assert a == b


def test_action_validation():
    env = SyntheticEnv("t3", PerturbationVector.none(), certain_model())
    with pytest.raises(ValueError):
        run_episode(env, lambda obs: (0.0, 0.0), max_steps=3, seed=1)
    with pytest.raises(ValueError):
        run_episode(env, lambda obs: (float("nan"),) * 7, max_steps=3, seed=1)


def test_suite_count_conservation():
    model = certain_model(0.5)
    tasks = [(f"task-{i}", vector_for(seed=i)) for i in range(4)]
    records = run_suite(
        tasks,
        zero_policy,
        trials_per_task=6,
        env_factory=lambda tid, vec: SyntheticEnv(tid, vec, model),
        max_steps=10,
    )
    assert len(records) == 24
    for i, rec in enumerate(records):
        assert rec.task_id == f"task-{i // 6}"
        assert rec.seed == derive_seed(rec.task_id, i % 6)


def test_suite_parallelism_deterministic():
    model = certain_model(0.6)
    tasks = [(f"p-{i}", vector_for(seed=i)) for i in range(6)]

    def factory(tid, vec):
        return SyntheticEnv(tid, vec, model)

    serial = run_suite(tasks, zero_policy, 10, factory, parallelism=1, max_steps=8)
    threaded = run_suite(tasks, zero_policy, 10, factory, parallelism=8, max_steps=8)
    assert serial == threaded


def test_suite_binomial_concentration():
    # derived property: empirical rate near the designed 0.75 at 2000 trials
    model = certain_model(0.75)
    records = run_suite(
        [("conc", vector_for())],
        zero_policy,
        trials_per_task=2000,
        env_factory=lambda tid, vec: SyntheticEnv(tid, vec, model),
        max_steps=3,
    )
    rate = sum(r.success for r in records) / len(records)
    assert abs(rate - 0.75) < 0.03


def test_suite_transport_error_becomes_failed_record():
    class ExplodingEnv:
        task_id = "boom"
        vector = PerturbationVector.none()

        def reset(self, seed):
            return {}

        def remote_step(self, obs):
            raise TransportError("wire snapped")

        def step(self, action):
            raise AssertionError("unreachable")

        def close(self):
            pass

    records = run_suite(
        [("boom", PerturbationVector.none())],
        zero_policy,
        trials_per_task=3,
        env_factory=lambda tid, vec: ExplodingEnv(),
        max_steps=5,
    )
    assert len(records) == 3
    assert all(not r.success for r in records)
    assert all(r.error and "wire snapped" in r.error for r in records)


def make_trajectory_record(actions, task_id="traj", success=True):
    trajectory = tuple(((0.0, 0.0), tuple(a)) for a in actions)
    return EpisodeRecord(
        task_id=task_id,
        perturbation=PerturbationVector.none(),
        success=success,
        steps=len(actions),
        seed=0,
        trajectory=trajectory,
    )


def move(dx, gripper):
    return (dx, 0.0, 0.0, 0.0, 0.0, 0.0, gripper)


def test_filter_strips_noops():
    record = make_trajectory_record(
        [
            move(0.0, 1.0),   # first action, zero deltas, gripper self-equal: no-op
            move(0.2, 1.0),   # real motion
            move(0.0, 1.0),   # no-op
            move(0.0, -1.0),  # gripper change: kept
            move(0.1, -1.0),  # real motion
            move(0.0, -1.0),  # no-op
        ]
    )
    out = filter_trajectories([record], noop_epsilon=0.0)
    assert len(out) == 1
    assert len(out[0].trajectory) == 3
    kept_dx = [a[0] for _, a in out[0].trajectory]
    assert kept_dx == [0.2, 0.0, 0.1]


def test_filter_epsilon_zero_boundary():
    record = make_trajectory_record([move(1e-12, 1.0), move(0.0, 1.0)])
    out = filter_trajectories([record], noop_epsilon=0.0)
    assert len(out[0].trajectory) == 1  # only the exactly-zero action removed
    out2 = filter_trajectories([record], noop_epsilon=1e-9)
    assert len(out2[0].trajectory) == 0


def test_filter_drops_failures_and_unrecorded():
    good = make_trajectory_record([move(0.1, 1.0)])
    failed = make_trajectory_record([move(0.1, 1.0)], success=False)
    bare = EpisodeRecord(
        task_id="bare",
        perturbation=PerturbationVector.none(),
        success=True,
        steps=4,
        seed=0,
    )
    out = filter_trajectories([good, failed, bare])
    assert [r.task_id for r in out] == ["traj"]


def test_record_invariants():
    with pytest.raises(ValueError):
        EpisodeRecord(
            task_id="x",
            perturbation=PerturbationVector.none(),
            success=True,
            steps=0,
            seed=0,
        )
    with pytest.raises(ValueError):
        EpisodeRecord(
            task_id="x",
            perturbation=PerturbationVector.none(),
            success=False,
            steps=-1,
            seed=0,
        )


def test_records_doc_round_trip():
    records = [
        make_trajectory_record([move(0.1, 1.0)], task_id="a"),
        EpisodeRecord(
            task_id="b",
            perturbation=vector_for(),
            success=False,
            steps=9,
            seed=4,
            error="timeout",
        ),
    ]
    doc = ep.records_to_doc(records, model_id="demo")
    assert doc["model_id"] == "demo"
    assert doc["records"][0]["has_trajectory"] is True
    back = ep.records_from_doc(doc)
    # trajectories ride in the sidecar, not the doc
    assert back[0] == dataclasses.replace(records[0], trajectory=None)
    assert back[1] == records[1]


def test_records_file_round_trip(tmp_path):
    records = [
        EpisodeRecord(
            task_id=f"t{i}",
            perturbation=vector_for(seed=i),
            success=i % 2 == 0,
            steps=i + 1,
            seed=i,
        )
        for i in range(5)
    ]
    path = tmp_path / "records.json"
    ep.save_records(path, records, model_id="m1")
    model_id, back = ep.load_records(path)
    assert model_id == "m1"
    assert back == records


def test_trajectory_sidecar_round_trip(tmp_path):
    records = [
        make_trajectory_record([move(0.1, 1.0), move(0.2, -1.0)], task_id="s0"),
        EpisodeRecord(
            task_id="s1",
            perturbation=PerturbationVector.none(),
            success=False,
            steps=2,
            seed=0,
        ),
        make_trajectory_record([move(0.3, 1.0)], task_id="s2"),
    ]
    path = tmp_path / "trajectories.bin"
    ep.save_trajectories(path, records)
    stripped = [
        r if r.trajectory is None else EpisodeRecord(
            task_id=r.task_id, perturbation=r.perturbation, success=r.success,
            steps=r.steps, seed=r.seed,
        )
        for r in records
    ]
    restored = ep.load_trajectories(path, stripped)
    assert [r.trajectory for r in restored] == [r.trajectory for r in records]
    # layout check: little-endian magic header
    blob = path.read_bytes()
    assert blob[:8] == b"PBTRAJ\x01\x00"


def test_sidecar_layout_parseable_by_hand(tmp_path):
    record = make_trajectory_record([move(0.5, 1.0)], task_id="layout")
    path = tmp_path / "t.bin"
    ep.save_trajectories(path, [record])
    blob = path.read_bytes()
    offset = 8
    count = struct.unpack_from("<I", blob, offset)[0]
    assert count == 1
    offset += 4
    index, n_steps, state_dim, action_dim = struct.unpack_from("<IIII", blob, offset)
    assert (index, n_steps, state_dim, action_dim) == (0, 1, 2, 7)
    offset += 16
    # states block then actions block, all little-endian f64
    floats = struct.unpack_from("<9d", blob, offset)
    assert floats[:2] == (0.0, 0.0)
    assert floats[2] == 0.5 and floats[8] == 1.0
    assert len(blob) == offset + 9 * 8


# ---------------------------------------------------------------------------
# Wire protocol


def test_message_round_trip():
    doc = {"type": "reset", "task_id": "t", "scene_patch": "", "instruction": "go"}
    assert proto.decode_message(proto.encode_message(doc)) == doc


def test_unknown_type_rejected():
    with pytest.raises(ProtocolError):
        proto.decode_message(b'{"type": "bogus"}\n')
    with pytest.raises(ProtocolError):
        proto.decode_message(b"not json\n")
    with pytest.raises(ProtocolError):
        proto.encode_message({"no_type": 1})


def test_observation_codec_byte_identical():
    rng = np.random.default_rng(0)
    views = {
        "agent": Image.from_array(rng.integers(0, 256, (12, 16, 3), dtype=np.uint8)),
        "wrist": Image.from_array(rng.integers(0, 256, (8, 8, 3), dtype=np.uint8)),
    }
    doc = proto.encode_observation(views, state=(0.25, -1.5))
    back_views, state = proto.decode_observation(doc)
    assert state == (0.25, -1.5)
    assert back_views["agent"].data == views["agent"].data
    assert back_views["wrist"].data == views["wrist"].data


class ScriptedAdapter(threading.Thread):
    """Speaks the adapter side: n action replies, then done."""

    def __init__(self, port_holder, n_actions=3, success=True, hang_after_hello=False):
        super().__init__(daemon=True)
        self.listener = socket.create_server(("127.0.0.1", 0))
        port_holder.append(self.listener.getsockname()[1])
        self.n_actions = n_actions
        self.success = success
        self.hang_after_hello = hang_after_hello
        self.received = []

    def run(self):
        conn, _ = self.listener.accept()
        transport = proto.SocketTransport(conn, timeout=5.0)
        hello = transport.recv()
        assert hello["type"] == "hello"
        transport.send({"type": "hello", "version": proto.PROTOCOL_VERSION})
        if self.hang_after_hello:
            time.sleep(3.0)
            transport.close()
            return
        reset = transport.recv()
        assert reset["type"] == "reset"
        self.received.append(reset)
        served = 0
        while True:
            msg = transport.recv()
            assert msg["type"] == "obs"
            if served < self.n_actions:
                transport.send({"type": "action", "values": list(move(0.1, 1.0))})
                served += 1
            else:
                transport.send(
                    {"type": "done", "success": self.success, "steps": served}
                )
                break
        transport.close()


class StaticSource:
    """Local observation source: never terminates on its own."""

    def __init__(self):
        self.frame = Image.filled(8, 6, 77)

    def reset(self, seed):
        return {"views": {"agent": self.frame}, "state": (0.0,)}

    def step(self, action):
        return {"views": {"agent": self.frame}, "state": (0.0,)}, False, False


def test_remote_episode_done_after_three_steps():
    ports = []
    adapter = ScriptedAdapter(ports, n_actions=3, success=True)
    adapter.start()
    transport = proto.connect_tcp("127.0.0.1", ports[0], timeout=5.0)
    client = proto.AdapterClient(transport)
    client.handshake()
    env = proto.RemoteEnv(
        client, StaticSource(), task_id="remote-1", vector=PerturbationVector.none(),
        instruction="pick up the mug",
    )
    rec = run_episode(env, max_steps=50, seed=2)
    env.close()
    adapter.join(timeout=5.0)
    assert rec.success is True
    assert rec.steps == 3
    assert adapter.received[0]["instruction"] == "pick up the mug"


def test_remote_hanging_peer_times_out():
    ports = []
    adapter = ScriptedAdapter(ports, hang_after_hello=True)
    adapter.start()
    transport = proto.connect_tcp("127.0.0.1", ports[0], timeout=0.4)
    client = proto.AdapterClient(transport)
    client.handshake()
    env = proto.RemoteEnv(
        client, StaticSource(), task_id="hang", vector=PerturbationVector.none()
    )
    start = time.monotonic()
    records = run_suite(
        [("hang", PerturbationVector.none())],
        zero_policy,
        trials_per_task=1,
        env_factory=lambda tid, vec: env,
        max_steps=10,
    )
    elapsed = time.monotonic() - start
    assert elapsed < 3.0
    assert len(records) == 1
    assert not records[0].success
    assert records[0].error is not None


def test_pipe_transport_round_trip():
    r1, w1 = os.pipe()
    r2, w2 = os.pipe()
    a = proto.PipeTransport(os.fdopen(r1, "rb"), os.fdopen(w2, "wb"), timeout=1.0)
    b = proto.PipeTransport(os.fdopen(r2, "rb"), os.fdopen(w1, "wb"), timeout=1.0)
    payload = {"type": "hello", "version": 1}
    b.send(payload)
    assert a.recv() == payload
    a.send({"type": "done", "success": True, "steps": 2})
    assert b.recv()["steps"] == 2
    a.close()
    b.close()


def test_pipe_transport_timeout():
    r1, w1 = os.pipe()
    a = proto.PipeTransport(os.fdopen(r1, "rb"), open(os.devnull, "wb"), timeout=0.2)
    start = time.monotonic()
    with pytest.raises(TransportError):
        a.recv()
    assert time.monotonic() - start < 2.0
    a.close()
    os.close(w1)
