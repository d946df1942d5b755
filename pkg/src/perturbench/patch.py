"""Scene patches: ordered key-path edit lists with diff/apply semantics.

A patch records, for every changed leaf, the dotted key path, the value it
replaces and the value it installs.  Carrying the old value makes patches
self-checking: applying one to a scene that has drifted fails with a
stale-patch error instead of silently installing the edit.

Leaf granularity: scalars, strings, booleans, and any list containing no
objects (so position vectors, the 3x3 rotation matrix and qpos are each one
leaf).  Lists of objects (the scene's object placements) are recursed into
by index; equal-length lists diff per index, a pure extension diffs as
appended entries, anything else is a whole-list replacement.

Additions and removals use ``null`` as the absent-side marker, which is
unambiguous because scene trees never contain null values.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Any

from . import canonical
from .errors import IncompatibleScenesError, PatchPathError, StalePatchError
from .scene import SceneSpec, from_tree, to_tree

PATCH_FILE_SUFFIX = ".patch"

Edit = tuple[str, Any, Any]  # (key_path, old_value, new_value)


@dataclass(frozen=True)
class ScenePatch:
    edits: tuple[Edit, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edits", tuple((p, o, n) for p, o, n in self.edits))

    def __bool__(self) -> bool:
        return bool(self.edits)

    @property
    def paths(self) -> tuple[str, ...]:
        return tuple(p for p, _, _ in self.edits)


def _is_leaf(value: Any) -> bool:
    if isinstance(value, list):
        return not any(isinstance(v, dict) for v in value)
    return not isinstance(value, dict)


def _join(path: str, key) -> str:
    return f"{path}.{key}" if path else str(key)


def _diff_tree(a: Any, b: Any, path: str, edits: list[Edit]) -> None:
    if isinstance(a, dict) and isinstance(b, dict):
        for key in sorted(set(a) | set(b)):
            sub = _join(path, key)
            if key not in b:
                edits.append((sub, copy.deepcopy(a[key]), None))
            elif key not in a:
                edits.append((sub, None, copy.deepcopy(b[key])))
            else:
                _diff_tree(a[key], b[key], sub, edits)
        return
    if isinstance(a, list) and isinstance(b, list) and not (_is_leaf(a) and _is_leaf(b)):
        if len(a) == len(b):
            for i, (va, vb) in enumerate(zip(a, b)):
                _diff_tree(va, vb, _join(path, i), edits)
            return
        if len(b) > len(a) and a == b[: len(a)]:
            for i in range(len(a), len(b)):
                edits.append((_join(path, i), None, copy.deepcopy(b[i])))
            return
        # Shrinks and reorders fall back to replacing the whole list.
        edits.append((path, copy.deepcopy(a), copy.deepcopy(b)))
        return
    if a != b:
        edits.append((path, copy.deepcopy(a), copy.deepcopy(b)))


def diff(base: SceneSpec, modified: SceneSpec) -> ScenePatch:
    """Edits that turn ``base`` into ``modified``, sorted by key path."""
    if base.scene_id != modified.scene_id:
        raise IncompatibleScenesError(
            f"cannot diff scenes {base.scene_id!r} and {modified.scene_id!r}"
        )
    edits: list[Edit] = []
    _diff_tree(to_tree(base), to_tree(modified), "", edits)
    edits.sort(key=lambda e: e[0])
    return ScenePatch(tuple(edits))


def _resolve_parent(tree: Any, segments: list[str], path: str):
    node = tree
    for seg in segments[:-1]:
        if isinstance(node, list):
            if not seg.isdigit() or int(seg) >= len(node):
                raise PatchPathError(f"no such path {path!r} (at segment {seg!r})")
            node = node[int(seg)]
        elif isinstance(node, dict):
            if seg not in node:
                raise PatchPathError(f"no such path {path!r} (at segment {seg!r})")
            node = node[seg]
        else:
            raise PatchPathError(f"path {path!r} descends into a leaf at {seg!r}")
    return node


def _apply_edit(tree: dict, edit: Edit) -> None:
    path, old, new = edit
    segments = path.split(".")
    parent = _resolve_parent(tree, segments, path)
    last = segments[-1]

    if isinstance(parent, list):
        if not last.isdigit():
            raise PatchPathError(f"list index expected in path {path!r}")
        idx = int(last)
        if old is None:
            if idx != len(parent):
                raise PatchPathError(
                    f"insert at {path!r} must append (index {idx}, length {len(parent)})"
                )
            parent.append(copy.deepcopy(new))
        elif idx >= len(parent):
            raise PatchPathError(f"no such path {path!r} (index out of range)")
        elif parent[idx] != old:
            raise StalePatchError(f"value at {path!r} does not match the patch's old value")
        elif new is None:
            del parent[idx]
        else:
            parent[idx] = copy.deepcopy(new)
        return

    if not isinstance(parent, dict):
        raise PatchPathError(f"path {path!r} descends into a leaf")
    if old is None:
        if last in parent:
            raise StalePatchError(f"cannot add {path!r}: key already present")
        parent[last] = copy.deepcopy(new)
    elif last not in parent:
        raise PatchPathError(f"no such path {path!r}")
    elif parent[last] != old:
        raise StalePatchError(f"value at {path!r} does not match the patch's old value")
    elif new is None:
        del parent[last]
    else:
        parent[last] = copy.deepcopy(new)


def apply(base: SceneSpec, patch: ScenePatch) -> SceneSpec:
    """Return ``base`` with the patch installed; ``base`` is unchanged."""
    tree = to_tree(base)
    for edit in patch.edits:
        _apply_edit(tree, edit)
    return from_tree(tree)


# ---------------------------------------------------------------------------
# Document form


def to_doc(patch: ScenePatch) -> dict:
    return {
        "edits": [{"path": p, "old": o, "new": n} for p, o, n in patch.edits],
    }


def from_doc(doc: dict) -> ScenePatch:
    return ScenePatch(tuple((e["path"], e.get("old"), e.get("new")) for e in doc["edits"]))


def dumps(patch: ScenePatch) -> str:
    return canonical.dumps(to_doc(patch))


def loads(text: str) -> ScenePatch:
    return from_doc(canonical.loads(text))


def save(path, patch: ScenePatch) -> None:
    canonical.dump_file(path, to_doc(patch))


def load(path) -> ScenePatch:
    return from_doc(canonical.load_file(path))
