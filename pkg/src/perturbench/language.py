"""Instruction rewrites: distraction, commonsense paraphrase, reasoning chains.

Three rewrite modes, all deterministic per (inputs, seed):

* ``distraction`` embeds the instruction unchanged in a longer
  conversational clause, so the original verb and target phrase survive;
* ``commonsense`` replaces every phrase the lexicon covers with a
  commonsense description of the object or action (longest match first,
  ties broken by earliest position);
* ``reasoning`` wraps the instruction in a goal-oriented template that
  forces indirect reading.

The built-in rewriter is template-based so tests run offline; an optional
HTTP client (:class:`ExternalRewriter`) delegates to a hosted model and
caches responses content-addressed on disk.  Templates mark the insertion
point with ``{instruction}``.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import urllib.request
from dataclasses import dataclass
from typing import Mapping

from .errors import (
    LexiconCoverageError,
    MissingObjectError,
    PerturbenchError,
    RewriterServiceError,
)
from .rng import Rng, derive_seed
from .scene import SceneSpec, TaskSpec, GoalPredicate

REWRITE_MODES = ("distraction", "commonsense", "reasoning")
SLOT = "{instruction}"

CACHE_ENV_VAR = "PERTURBENCH_CACHE"


class NoOpRewriteError(PerturbenchError):
    """The requested edit would leave the task unchanged."""


@dataclass(frozen=True)
class RewriteLexicon:
    """Phrase substitutions and sentence templates for the rule rewriter."""

    synonyms: Mapping[str, tuple[str, ...]]
    distraction_templates: tuple[str, ...]
    reasoning_templates: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "synonyms",
            {k: tuple(v) for k, v in self.synonyms.items()},
        )
        for phrase, alts in self.synonyms.items():
            if not alts:
                raise ValueError(f"synonym entry {phrase!r} has no replacements")
        for template in self.distraction_templates + self.reasoning_templates:
            if template.count(SLOT) != 1:
                raise ValueError(
                    f"template must contain exactly one {SLOT}: {template!r}"
                )

    @classmethod
    def parse(cls, text: str) -> "RewriteLexicon":
        """Parse the lexicon file format.

        Three sections introduced by ``[synonyms]``, ``[distraction]`` and
        ``[reasoning]``.  Synonym rows are tab-separated
        ``phrase<TAB>replacement...``; template sections hold one template
        per line.  Blank lines and ``#`` comments are ignored.
        """
        synonyms: dict[str, tuple[str, ...]] = {}
        distraction: list[str] = []
        reasoning: list[str] = []
        section = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.rstrip("\n")
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if stripped in ("[synonyms]", "[distraction]", "[reasoning]"):
                section = stripped[1:-1]
                continue
            if section == "synonyms":
                parts = line.split("\t")
                if len(parts) < 2:
                    raise ValueError(
                        f"line {lineno}: synonym row needs phrase<TAB>replacement"
                    )
                synonyms[parts[0].strip()] = tuple(p.strip() for p in parts[1:])
            elif section == "distraction":
                distraction.append(stripped)
            elif section == "reasoning":
                reasoning.append(stripped)
            else:
                raise ValueError(f"line {lineno}: content before any section header")
        return cls(synonyms, tuple(distraction), tuple(reasoning))

    @classmethod
    def load(cls, path) -> "RewriteLexicon":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.parse(fh.read())


DEFAULT_LEXICON = RewriteLexicon(
    synonyms={
        "push": ("propel", "slide", "nudge"),
        "pick up": ("lift off the surface", "grasp and raise"),
        "put": ("set down", "position"),
        "open": ("pull open", "swing open"),
        "close": ("push shut", "swing shut"),
        "turn on": ("activate", "switch into operation"),
        # Noun entries stay article-free; the instruction supplies its own.
        "plate": (
            "flat surface used for holding food",
            "round dish meals are served on",
        ),
        "stove": (
            "area designated for cooking heat adjustment",
            "appliance that heats cookware",
        ),
        "bowl": ("deep round container for food",),
        "mug": ("handled cup for hot drinks",),
        "bottle": ("narrow-necked liquid container",),
        "drawer": ("sliding storage compartment",),
        "cabinet": ("enclosed storage unit with doors",),
        "microwave": ("appliance that heats food with radio waves",),
        "basket": ("woven open-topped carrier",),
        "book": ("bound stack of printed pages",),
        "alphabet soup": ("canned soup with letter-shaped pasta",),
        "tomato sauce": ("canned red cooking sauce",),
        "cream cheese": ("soft white spreadable cheese",),
        "butter": ("solid dairy spread",),
        "chocolate pudding": ("sweet brown dessert cup",),
        "wine bottle": ("tall glass container for wine",),
        "moka pot": ("stovetop coffee brewer",),
    },
    distraction_templates=(
        "before turning on the burner, {instruction}",
        "when you get a chance, {instruction}",
        "the counter was just wiped down, so {instruction}",
        "someone left the kitchen in a hurry; please {instruction}",
        "after you check that nothing is in the way, {instruction}",
        "{instruction}, and mind the utensils sitting nearby",
    ),
    reasoning_templates=(
        "make sure the goal of '{instruction}' ends up accomplished",
        "figure out what '{instruction}' requires and see it through",
        "the outcome that matters is this: {instruction}",
        "work out the steps so that '{instruction}' ends up done",
    ),
)


def _find_covered_phrases(instruction: str, lexicon: RewriteLexicon):
    """Non-overlapping lexicon matches, longest phrase first."""
    lowered = instruction.lower()
    taken: list[tuple[int, int, str]] = []  # (start, end, phrase)
    for phrase in sorted(lexicon.synonyms, key=lambda p: (-len(p), p)):
        start = 0
        while True:
            pos = lowered.find(phrase, start)
            if pos < 0:
                break
            end = pos + len(phrase)
            word_bounded = (pos == 0 or not lowered[pos - 1].isalnum()) and (
                end == len(lowered) or not lowered[end].isalnum()
            )
            if word_bounded and all(e <= pos or end <= s for s, e, _ in taken):
                taken.append((pos, end, phrase))
            start = pos + 1
    return sorted(taken)


def rewrite(instruction: str, mode: str, lexicon: RewriteLexicon, seed: int) -> str:
    """Rewrite the instruction per the requested mode; never touches goals."""
    if not instruction:
        raise ValueError("instruction must be non-empty")
    if mode not in REWRITE_MODES:
        raise ValueError(f"unknown rewrite mode {mode!r}")
    rng = Rng(derive_seed(seed, "rewrite", mode, instruction))

    if mode == "distraction":
        template = rng.choice(lexicon.distraction_templates)
        return template.replace(SLOT, instruction)

    if mode == "reasoning":
        template = rng.choice(lexicon.reasoning_templates)
        return template.replace(SLOT, instruction)

    matches = _find_covered_phrases(instruction, lexicon)
    if not matches:
        raise LexiconCoverageError(
            f"lexicon covers no phrase of {instruction!r}"
        )
    out = []
    cursor = 0
    for start, end, phrase in matches:
        out.append(instruction[cursor:start])
        out.append(rng.choice(lexicon.synonyms[phrase]))
        cursor = end
    out.append(instruction[cursor:])
    rewritten = "".join(out)
    if rewritten == instruction:
        # Possible only if a synonym list maps a phrase to itself.
        raise LexiconCoverageError(f"rewrite left {instruction!r} unchanged")
    return rewritten


def blank(instruction: str) -> str:
    """The blank-instruction ablation: every instruction maps to ''."""
    return ""


def object_phrase(scene: SceneSpec, object_id: str) -> str:
    """Natural-language phrase for an object (category with spaces)."""
    obj = scene.object_by_id(object_id)
    if obj is None:
        raise MissingObjectError(f"no object {object_id!r} in scene {scene.scene_id!r}")
    return obj.category.replace("_", " ")


def replace_goal(task: TaskSpec, scene: SceneSpec, new_target_id: str) -> TaskSpec:
    """Swap the task's target object, editing goal and instruction together."""
    new_obj = scene.object_by_id(new_target_id)
    if new_obj is None:
        raise MissingObjectError(
            f"no object {new_target_id!r} in scene {scene.scene_id!r}"
        )
    if not task.goal.args:
        raise ValueError(f"goal {task.goal.text} has no target argument")
    old_target_id = task.goal.args[0]
    if new_target_id == old_target_id:
        raise NoOpRewriteError(f"{new_target_id!r} is already the target")

    old_phrase = object_phrase(scene, old_target_id)
    new_phrase = new_obj.category.replace("_", " ")
    pattern = re.compile(re.escape(old_phrase), re.IGNORECASE)
    instruction, n_subs = pattern.subn(new_phrase, task.instruction)
    if n_subs == 0:
        raise MissingObjectError(
            f"instruction {task.instruction!r} does not mention {old_phrase!r}; "
            "cannot edit goal and instruction atomically"
        )
    args = tuple(new_target_id if a == old_target_id else a for a in task.goal.args)
    return TaskSpec(
        instruction=instruction,
        goal=GoalPredicate(task.goal.name, args),
        suite=task.suite,
    )


# ---------------------------------------------------------------------------
# External rewriter


class ExternalRewriter:
    """HTTP client for model-backed rewrites, with an on-disk cache.

    Requests are ``POST {"instruction":..., "mode":...}``; the endpoint
    answers ``{"rewritten":...}``.  Responses are cached in files named by
    the SHA-256 of the request body, so repeat runs are offline and
    deterministic.  The cache directory defaults to ``$PERTURBENCH_CACHE``.
    """

    def __init__(self, url: str, cache_dir: str | None = None, timeout_s: float = 30.0):
        self.url = url
        self.timeout_s = timeout_s
        self.cache_dir = cache_dir or os.environ.get(CACHE_ENV_VAR)
        self._lock = threading.Lock()

    def _cache_path(self, body: bytes) -> str | None:
        if not self.cache_dir:
            return None
        digest = hashlib.sha256(body).hexdigest()
        return os.path.join(self.cache_dir, f"{digest}.json")

    def rewrite(self, instruction: str, mode: str) -> str:
        if mode not in REWRITE_MODES:
            raise ValueError(f"unknown rewrite mode {mode!r}")
        body = json.dumps(
            {"instruction": instruction, "mode": mode}, sort_keys=True
        ).encode("utf-8")
        path = self._cache_path(body)
        if path is not None:
            with self._lock:
                if os.path.exists(path):
                    with open(path, "r", encoding="utf-8") as fh:
                        return json.load(fh)["rewritten"]

        request = urllib.request.Request(
            self.url, data=body, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout_s) as response:
                payload = json.loads(response.read().decode("utf-8"))
        except (OSError, ValueError) as exc:
            raise RewriterServiceError(f"rewriter request failed: {exc}") from exc
        if not isinstance(payload, dict) or "rewritten" not in payload:
            raise RewriterServiceError(f"malformed rewriter response: {payload!r}")
        rewritten = payload["rewritten"]

        if path is not None:
            with self._lock:
                os.makedirs(self.cache_dir, exist_ok=True)
                tmp = f"{path}.tmp"
                with open(tmp, "w", encoding="utf-8") as fh:
                    json.dump({"rewritten": rewritten}, fh)
                os.replace(tmp, path)
        return rewritten
