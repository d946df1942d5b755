"""Episode and suite runners with deterministic seeds and record I/O.

An environment handle supplies reset(seed) -> observation and
step(action) -> (observation, done, success) plus task_id and vector
attributes.  A policy is a callable observation -> action (7 scalars:
6 pose deltas and a gripper command).  Per-trial seeds derive from
(task_id, trial index) only, so a suite is reproducible regardless of
parallelism or scheduling order.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

from ..canonical import dump_file, load_file
from ..dims import PerturbationVector
from ..errors import TransportError
from ..rng import derive_seed

ACTION_DIM = 7
DEFAULT_MAX_STEPS = 600

_SIDECAR_MAGIC = b"PBTRAJ\x01\x00"


@dataclass(frozen=True)
class EpisodeRecord:
    """Outcome of one trial.

    trajectory, when recorded, is a tuple of (state, action) pairs in step
    order; error carries a transport failure annotation, in which case the
    trial counts as failed.
    """

    task_id: str
    perturbation: PerturbationVector
    success: bool
    steps: int
    seed: int
    trajectory: tuple[tuple[tuple[float, ...], tuple[float, ...]], ...] | None = None
    error: str | None = None

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("steps must be nonnegative")
        if self.success and self.steps < 1:
            raise ValueError("a successful episode takes at least one step")


def _check_action(action) -> tuple[float, ...]:
    values = tuple(float(v) for v in action)
    if len(values) != ACTION_DIM:
        raise ValueError(f"action must have {ACTION_DIM} values, got {len(values)}")
    if not all(math.isfinite(v) for v in values):
        raise ValueError("action values must be finite")
    return values


def run_episode(
    env,
    policy: Callable | None = None,
    max_steps: int = DEFAULT_MAX_STEPS,
    seed: int = 0,
    record_trajectory: bool = False,
) -> EpisodeRecord:
    """Runs one episode to termination or the step cap.

    Two environment flavors: a local env (reset/step) driven by the policy
    callable, or a remote env (additionally exposing remote_step) whose
    policy and success verdict live across the wire, in which case the
    policy argument is ignored.  A TransportError from a remote env is
    re-raised with a partial record in its ``partial`` attribute.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    if hasattr(env, "remote_step"):
        return _run_remote_episode(env, max_steps, seed)
    if policy is None:
        raise ValueError("a local environment needs a policy")
    obs = env.reset(seed)
    steps = 0
    success = False
    trajectory: list[tuple[tuple[float, ...], tuple[float, ...]]] = []
    while steps < max_steps:
        action = _check_action(policy(obs))
        if record_trajectory:
            state = tuple(float(v) for v in obs.get("state", ()))
            trajectory.append((state, action))
        obs, done, success = env.step(action)
        steps += 1
        if done:
            break
    return EpisodeRecord(
        task_id=env.task_id,
        perturbation=env.vector,
        success=bool(success),
        steps=steps,
        seed=seed,
        trajectory=tuple(trajectory) if record_trajectory else None,
    )


def _run_remote_episode(env, max_steps: int, seed: int) -> EpisodeRecord:
    """External flavor: actions and the terminal verdict come from the peer."""
    steps = 0
    try:
        obs = env.reset(seed)
        # One extra exchange lets the peer report done after its final step.
        for _ in range(max_steps + 1):
            reply = env.remote_step(obs)
            if reply[0] == "done":
                _, success, peer_steps = reply
                return EpisodeRecord(
                    task_id=env.task_id, perturbation=env.vector,
                    success=success, steps=peer_steps, seed=seed,
                )
            obs, done, success = env.step(reply[1])
            steps += 1
            if done:
                return EpisodeRecord(
                    task_id=env.task_id, perturbation=env.vector,
                    success=bool(success), steps=steps, seed=seed,
                )
        return EpisodeRecord(
            task_id=env.task_id, perturbation=env.vector,
            success=False, steps=max_steps, seed=seed,
        )
    except TransportError as exc:
        exc.partial = EpisodeRecord(
            task_id=env.task_id, perturbation=env.vector,
            success=False, steps=steps, seed=seed, error=str(exc),
        )
        raise


def run_suite(
    tasks: Sequence,
    policy: Callable,
    trials_per_task: int,
    env_factory: Callable,
    parallelism: int = 1,
    max_steps: int = DEFAULT_MAX_STEPS,
    record_trajectories: bool = False,
) -> list[EpisodeRecord]:
    """Runs trials_per_task episodes per (scene, vector) task.

    Returns len(tasks) * trials_per_task records in canonical order: tasks
    in input order, trials in index order.  A TransportError inside one
    episode is recorded as a failed trial with an error annotation and the
    suite continues.
    """
    if trials_per_task < 1:
        raise ValueError("trials_per_task must be at least 1")
    if parallelism < 1:
        raise ValueError("parallelism must be at least 1")

    def one(task, trial: int) -> EpisodeRecord:
        scene, vector = task
        env = env_factory(scene, vector)
        seed = derive_seed(env.task_id, trial)
        try:
            record = run_episode(
                env, policy, max_steps=max_steps, seed=seed,
                record_trajectory=record_trajectories,
            )
        except TransportError as exc:
            record = getattr(exc, "partial", None) or EpisodeRecord(
                task_id=env.task_id,
                perturbation=vector,
                success=False,
                steps=0,
                seed=seed,
                error=str(exc),
            )
        finally:
            close = getattr(env, "close", None)
            if close is not None:
                close()
        return record

    jobs = [(task, trial) for task in tasks for trial in range(trials_per_task)]
    if parallelism == 1:
        return [one(task, trial) for task, trial in jobs]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(one, task, trial) for task, trial in jobs]
        return [f.result() for f in futures]


def _is_noop(action: tuple[float, ...], prev_gripper: float, eps: float) -> bool:
    # eps bounds the pose deltas; the gripper must be exactly unchanged.
    return all(abs(v) <= eps for v in action[:6]) and action[6] == prev_gripper


def filter_trajectories(
    records: Sequence[EpisodeRecord], noop_epsilon: float = 0.0
) -> list[EpisodeRecord]:
    """Keeps successful recorded episodes and strips no-op steps.

    A step is a no-op when every pose delta has magnitude at most
    noop_epsilon and the gripper command equals the previous action's (the
    first action is compared with itself).  With noop_epsilon zero, only
    exactly-zero actions are removed.
    """
    if noop_epsilon < 0.0:
        raise ValueError("noop_epsilon must be nonnegative")
    out: list[EpisodeRecord] = []
    for record in records:
        if not record.success or record.trajectory is None:
            continue
        kept = []
        prev_gripper = None
        for state, action in record.trajectory:
            reference = action[6] if prev_gripper is None else prev_gripper
            if not _is_noop(action, reference, noop_epsilon):
                kept.append((state, action))
            prev_gripper = action[6]
        out.append(replace(record, trajectory=tuple(kept)))
    return out


def records_to_doc(records: Sequence[EpisodeRecord], model_id: str = "") -> dict:
    rows = []
    for r in records:
        rows.append({
            "task_id": r.task_id,
            "perturbation": r.perturbation.to_doc(),
            "success": r.success,
            "steps": r.steps,
            "seed": r.seed,
            "error": r.error,
            "has_trajectory": r.trajectory is not None,
        })
    return {"model_id": model_id, "records": rows}


def records_from_doc(doc: dict) -> list[EpisodeRecord]:
    out = []
    for row in doc["records"]:
        out.append(EpisodeRecord(
            task_id=row["task_id"],
            perturbation=PerturbationVector.from_doc(row["perturbation"]),
            success=bool(row["success"]),
            steps=int(row["steps"]),
            seed=int(row["seed"]),
            error=row.get("error"),
        ))
    return out


def save_records(path, records: Sequence[EpisodeRecord], model_id: str = "") -> None:
    dump_file(path, records_to_doc(records, model_id))


def load_records(path) -> tuple[str, list[EpisodeRecord]]:
    doc = load_file(path)
    return doc.get("model_id", ""), records_from_doc(doc)


def save_trajectories(path, records: Sequence[EpisodeRecord]) -> None:
    """Columnar little-endian sidecar for recorded trajectories.

    Layout: magic, record count, then per recorded trajectory the record
    index, step count, state and action widths, all states (f64), all
    actions (f64).
    """
    entries = [(i, r.trajectory) for i, r in enumerate(records) if r.trajectory is not None]
    with open(path, "wb") as fh:
        fh.write(_SIDECAR_MAGIC)
        fh.write(struct.pack("<I", len(entries)))
        for index, trajectory in entries:
            state_dim = len(trajectory[0][0]) if trajectory else 0
            for state, action in trajectory:
                if len(state) != state_dim:
                    raise ValueError("trajectory states must share one width")
                if len(action) != ACTION_DIM:
                    raise ValueError("trajectory actions must have 7 values")
            fh.write(struct.pack("<IIII", index, len(trajectory), state_dim, ACTION_DIM))
            for state, _ in trajectory:
                fh.write(struct.pack(f"<{state_dim}d", *state))
            for _, action in trajectory:
                fh.write(struct.pack(f"<{ACTION_DIM}d", *action))


def load_trajectories(path, records: Sequence[EpisodeRecord]) -> list[EpisodeRecord]:
    """Reattaches sidecar trajectories to records loaded from a document."""
    out = list(records)
    with open(path, "rb") as fh:
        magic = fh.read(len(_SIDECAR_MAGIC))
        if magic != _SIDECAR_MAGIC:
            raise ValueError("not a trajectory sidecar file")
        (count,) = struct.unpack("<I", fh.read(4))
        for _ in range(count):
            index, n_steps, state_dim, action_dim = struct.unpack("<IIII", fh.read(16))
            if index >= len(out):
                raise ValueError(f"sidecar record index {index} out of range")
            steps = []
            states_raw = fh.read(8 * state_dim * n_steps)
            actions_raw = fh.read(8 * action_dim * n_steps)
            states = struct.unpack(f"<{state_dim * n_steps}d", states_raw)
            actions = struct.unpack(f"<{action_dim * n_steps}d", actions_raw)
            for k in range(n_steps):
                state = states[k * state_dim:(k + 1) * state_dim]
                action = actions[k * action_dim:(k + 1) * action_dim]
                steps.append((state, action))
            out[index] = replace(out[index], trajectory=tuple(steps))
    return out
