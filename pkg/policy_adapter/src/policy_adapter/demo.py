"""Self-contained demo assets: a scene XML, a JSON task file, a binding.

These stand in for a real simulator's files so the adapter can be run and
tested end to end without bundling one.  The binding covers every camera,
light, robot-init, texture, and instruction path of canonical scene trees;
object layout and goal-predicate paths are marked unsupported because
their native encoding is simulator-version dependent.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from pathlib import Path

from .binding import write_task_json, write_xml

SCENE_FILE = "scene.xml"
TASK_FILE = "task.json"
BINDING_FILE = "binding.json"

DEMO_BINDING = {
    "bindings": {
        "camera.position": {
            "kind": "xml_attr", "file": SCENE_FILE,
            "element": "camera", "name": "agent", "attribute": "pos",
        },
        "camera.rotation": {
            "kind": "xml_attr", "file": SCENE_FILE,
            "element": "camera", "name": "agent", "attribute": "xmat",
        },
        "camera.look_center": {
            "kind": "xml_attr", "file": SCENE_FILE,
            "element": "camera", "name": "agent", "attribute": "target",
        },
        "camera.fov_deg": {
            "kind": "xml_attr", "file": SCENE_FILE,
            "element": "camera", "name": "agent", "attribute": "fovy",
        },
        "lights.diffuse": {
            "kind": "xml_attr", "file": SCENE_FILE,
            "element": "light", "name": "main", "attribute": "diffuse",
        },
        "lights.direction": {
            "kind": "xml_attr", "file": SCENE_FILE,
            "element": "light", "name": "main", "attribute": "dir",
        },
        "lights.specular": {
            "kind": "xml_attr", "file": SCENE_FILE,
            "element": "light", "name": "main", "attribute": "specular",
        },
        "lights.shadows": {
            "kind": "xml_attr", "file": SCENE_FILE,
            "element": "light", "name": "main", "attribute": "castshadow",
        },
        "robot_init.qpos": {
            "kind": "xml_attr", "file": SCENE_FILE,
            "element": "robot", "name": "arm", "attribute": "qpos",
        },
        "robot_init.gripper": {
            "kind": "xml_attr", "file": SCENE_FILE,
            "element": "robot", "name": "arm", "attribute": "gripper",
        },
        "textures.scene-wall": {
            "kind": "xml_attr", "file": SCENE_FILE,
            "element": "texture", "name": "scene-wall", "attribute": "material",
        },
        "textures.work-surface": {
            "kind": "xml_attr", "file": SCENE_FILE,
            "element": "texture", "name": "work-surface", "attribute": "material",
        },
        "task.instruction": {
            "kind": "json_field", "file": TASK_FILE,
            "field": "language_instruction",
        },
        "scene_id": "unsupported",
        "objects.**": "unsupported",
        "task.**": "unsupported",
        "textures.*": "unsupported",
    }
}


def _demo_scene_root() -> ET.Element:
    root = ET.Element("scene", {"name": "demo"})
    ET.SubElement(root, "camera", {
        "name": "agent",
        "pos": "1.2 0.5 0.1",
        "target": "0.0 0.0 0.1",
        "fovy": "60.0",
        "xmat": "0.384 -0.071 0.920 -0.923 -0.029 0.383 0.0 -0.997 -0.076",
    })
    ET.SubElement(root, "light", {
        "name": "main",
        "diffuse": "0.5 0.5 0.5",
        "dir": "0.0 0.0 -1.0",
        "specular": "0.3",
        "castshadow": "true",
    })
    ET.SubElement(root, "robot", {
        "name": "arm",
        "qpos": "0.0 -0.3 0.2 -1.8 0.0 1.6 0.8",
        "gripper": "0.02",
    })
    textures = ET.SubElement(root, "assets")
    ET.SubElement(textures, "texture", {"name": "scene-wall", "material": "wall_plain"})
    ET.SubElement(textures, "texture", {"name": "work-surface", "material": "table_oak"})
    return root


def write_demo_assets(root_dir) -> dict:
    """Writes scene.xml, task.json, and binding.json under root_dir."""
    root = Path(root_dir)
    root.mkdir(parents=True, exist_ok=True)
    write_xml(_demo_scene_root(), root / SCENE_FILE)
    write_task_json(
        {
            "task_id": "demo-task",
            "language_instruction": "pick up the mug",
            "goal": {"predicate": "grasped", "args": ["mug-1"]},
        },
        root / TASK_FILE,
    )
    with open(root / BINDING_FILE, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(DEMO_BINDING, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {
        "scene": root / SCENE_FILE,
        "task": root / TASK_FILE,
        "binding": root / BINDING_FILE,
    }
