"""Mapping canonical scene key paths onto simulator-native files.

A scene patch is a JSON edit list over the canonical scene tree (dotted
key paths with old/new values).  A PatchBinding says, for each path the
toolkit can emit, where that value lives natively: an XML attribute in a
scene definition file, or a field in a JSON task definition.  Paths the
native format cannot express are marked "unsupported" so a patch touching
them is rejected up front instead of silently dropped.

Pattern language: a path pattern is dotted segments where "*" matches one
segment and a trailing "**" matches one or more.  Exact entries win over
patterns; among patterns the one with the most literal segments wins,
declaration order breaking ties.

Native application installs the patch's new values; the old values guard
canonical-side application only, since native files format numbers their
own way and comparing across representations is not well defined.
"""

from __future__ import annotations

import json
import shutil
import tempfile
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import BindingError, PatchFormatError, UnboundPathError

UNSUPPORTED = "unsupported"
RULE_KINDS = ("xml_attr", "json_field")


def parse_patch(text: str) -> list[tuple[str, Any, Any]]:
    """Patch text to (path, old, new) tuples, validating the shape."""
    if not text.strip():
        return []
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PatchFormatError(f"patch text is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("edits"), list):
        raise PatchFormatError("patch document must carry an 'edits' list")
    edits = []
    for entry in doc["edits"]:
        if not isinstance(entry, dict) or not isinstance(entry.get("path"), str):
            raise PatchFormatError(f"malformed edit entry: {entry!r}")
        edits.append((entry["path"], entry.get("old"), entry.get("new")))
    return edits


def _matches(pattern: str, path: str) -> bool:
    pseg = pattern.split(".")
    seg = path.split(".")
    if pseg and pseg[-1] == "**":
        head = pseg[:-1]
        if len(seg) <= len(head):
            return False
        return all(p in ("*", s) for p, s in zip(head, seg))
    if len(pseg) != len(seg):
        return False
    return all(p in ("*", s) for p, s in zip(pseg, seg))


def _specificity(pattern: str) -> int:
    return sum(1 for seg in pattern.split(".") if seg not in ("*", "**"))


def _check_rule(pattern: str, rule: Any) -> None:
    if rule == UNSUPPORTED:
        return
    if not isinstance(rule, dict):
        raise BindingError(f"rule for {pattern!r} must be a mapping or 'unsupported'")
    kind = rule.get("kind")
    if kind not in RULE_KINDS:
        raise BindingError(f"rule for {pattern!r} has unknown kind {kind!r}")
    required = ("file", "element", "attribute") if kind == "xml_attr" else ("file", "field")
    missing = [key for key in required if not isinstance(rule.get(key), str)]
    if missing:
        raise BindingError(f"rule for {pattern!r} is missing {', '.join(missing)}")


@dataclass(frozen=True)
class PatchBinding:
    rules: tuple[tuple[str, Any], ...]

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple((p, r) for p, r in self.rules))
        for pattern, rule in self.rules:
            _check_rule(pattern, rule)

    @classmethod
    def from_doc(cls, doc: dict) -> "PatchBinding":
        if not isinstance(doc, dict) or not isinstance(doc.get("bindings"), dict):
            raise BindingError("binding document must carry a 'bindings' mapping")
        return cls(tuple(doc["bindings"].items()))

    @classmethod
    def load(cls, path) -> "PatchBinding":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise BindingError(f"binding file is not valid JSON: {exc}") from exc
        return cls.from_doc(doc)

    def lookup(self, path: str):
        """The matching rule, or None when the path is unbound."""
        best = None
        best_key = None
        for order, (pattern, rule) in enumerate(self.rules):
            if pattern == path:
                return rule
            if "*" in pattern and _matches(pattern, path):
                key = (-_specificity(pattern), order)
                if best_key is None or key < best_key:
                    best, best_key = rule, key
        return best


# ---------------------------------------------------------------------------
# Native value formatting and file edits


def format_value(value: Any) -> str:
    """Native attribute text: flat space-joined numbers, true/false booleans."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value) if isinstance(value, float) else str(value)
    if isinstance(value, str):
        return value
    if isinstance(value, list):
        return " ".join(format_value(v) for v in value)
    raise BindingError(f"cannot format {type(value).__name__} for a native attribute")


def write_xml(root: ET.Element, path) -> None:
    """Canonical XML writing, shared by asset generation and edits."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(ET.tostring(root, encoding="unicode"))
        fh.write("\n")


def _apply_xml_edits(path: Path, edits) -> None:
    tree = ET.parse(path)
    root = tree.getroot()
    for key_path, new, rule in edits:
        nodes = [
            el
            for el in root.iter(rule["element"])
            if "name" not in rule or el.get("name") == rule["name"]
        ]
        if len(nodes) != 1:
            label = rule["element"] + (f"[name={rule['name']}]" if "name" in rule else "")
            raise BindingError(
                f"binding for {key_path!r} expects exactly one {label} element, "
                f"found {len(nodes)} in {rule['file']}"
            )
        if new is None:
            nodes[0].attrib.pop(rule["attribute"], None)
        else:
            nodes[0].set(rule["attribute"], format_value(new))
    write_xml(root, path)


def write_task_json(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _apply_json_edits(path: Path, edits) -> None:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    for key_path, new, rule in edits:
        if new is None:
            doc.pop(rule["field"], None)
        else:
            doc[rule["field"]] = new
    write_task_json(doc, path)


def apply_patch_native(asset_root, patch_text: str, binding: PatchBinding, out_dir=None):
    """Apply a canonical scene patch to a scratch copy of the native assets.

    Returns the scratch directory; the originals are never touched.  Every
    patch path must resolve to a rule before any file is copied, so a
    rejected patch leaves no partial output.
    """
    edits = parse_patch(patch_text)
    unbound, unsupported, resolved = [], [], []
    for key_path, _, new in edits:
        rule = binding.lookup(key_path)
        if rule is None:
            unbound.append(key_path)
        elif rule == UNSUPPORTED:
            unsupported.append(key_path)
        else:
            resolved.append((key_path, new, rule))
    if unbound or unsupported:
        raise UnboundPathError(sorted(set(unbound)), sorted(set(unsupported)))

    scratch = Path(out_dir) if out_dir is not None else Path(
        tempfile.mkdtemp(prefix="adapter-scene-")
    )
    shutil.copytree(asset_root, scratch, dirs_exist_ok=True)

    by_file: dict[str, list] = {}
    kinds: dict[str, str] = {}
    for key_path, new, rule in resolved:
        by_file.setdefault(rule["file"], []).append((key_path, new, rule))
        if kinds.setdefault(rule["file"], rule["kind"]) != rule["kind"]:
            raise BindingError(f"mixed rule kinds target {rule['file']!r}")

    for rel, file_edits in by_file.items():
        target = scratch / rel
        if not target.is_file():
            raise BindingError(f"bound file {rel!r} is missing from the assets")
        if kinds[rel] == "xml_attr":
            _apply_xml_edits(target, file_edits)
        else:
            _apply_json_edits(target, file_edits)
    return scratch
