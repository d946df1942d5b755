"""Command-line application.

Subcommands: generate (build a variant manifest from a config), evaluate
(run a suite against the synthetic environment), balance (ceiling filter
plus mechanism balancing), analyze (pairwise compositional statistics),
stratify (difficulty levels from multi-model records), report (success and
drop tables).  All outputs are canonical documents under a run directory
with the layout manifest/, records/, reports/ unless explicit paths are
given.  Randomized commands require --seed; identical inputs and seed give
identical output files.
"""

from __future__ import annotations

import argparse
import glob
import math
import os
import sys
from typing import Mapping, Sequence

from .builder import (
    DifficultyLevel,
    GeneratorConfig,
    filter_and_balance,
    generate_variants,
    load_manifest,
    save_manifest,
    stratify,
)
from .canonical import dump_file, load_file
from .dims import DIMENSIONS, LEVELED_DIMENSIONS, SUB_DIMENSIONS, PerturbationSpec, PerturbationVector
from .errors import PerturbenchError
from .harness.episodes import EpisodeRecord, load_records, run_suite, save_records
from .harness.synthetic import SyntheticEnv, SyntheticEnvModel
from .report import aggregate, level_curves, render_table
from .scene import SceneSpec
from .sceneops import DistractorRegistry, TextureRegistry, WorkspaceBounds
from .stats import PairSuccessTable, chi_square, pairwise_heatmap, success_conditioned
from .errors import DegenerateTableError

MANIFEST_DIR = "manifest"
RECORDS_DIR = "records"
REPORTS_DIR = "reports"


class UsageError(PerturbenchError):
    """Malformed configuration; the message names the offending key path."""


# ---------------------------------------------------------------------------
# Config parsing


def _require(doc: Mapping, key: str, kind, path: str):
    if key not in doc:
        raise UsageError(f"{path}.{key}: missing")
    value = doc[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise UsageError(f"{path}.{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def _scenes_from_config(doc: Mapping, config_dir: str) -> list[SceneSpec]:
    if "tasks" in doc:
        rows = doc["tasks"]
        if not isinstance(rows, list) or not rows:
            raise UsageError("config.tasks: expected a non-empty list of scene documents")
        try:
            return [SceneSpec.from_tree(row) for row in rows]
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"config.tasks: bad scene document ({exc})") from exc
    if "tasks_dir" in doc:
        directory = os.path.join(config_dir, doc["tasks_dir"])
        paths = sorted(glob.glob(os.path.join(directory, "*.json")))
        if not paths:
            raise UsageError(f"config.tasks_dir: no *.json scenes under {directory}")
        out = []
        for path in paths:
            try:
                out.append(SceneSpec.from_tree(load_file(path)))
            except (KeyError, TypeError, ValueError) as exc:
                raise UsageError(f"config.tasks_dir: bad scene {path} ({exc})") from exc
        return out
    raise UsageError("config.tasks: missing (provide tasks or tasks_dir)")


def _generator_config(doc: Mapping) -> GeneratorConfig:
    base = GeneratorConfig.default()
    kwargs = {}
    if "registry" in doc:
        try:
            kwargs["registry"] = DistractorRegistry(
                tuple((row[0], tuple(row[1])) for row in doc["registry"])
            )
        except (IndexError, TypeError, ValueError) as exc:
            raise UsageError(f"config.registry: {exc}") from exc
    if "textures" in doc:
        try:
            kwargs["textures"] = TextureRegistry(
                tuple((row[0], row[1]) for row in doc["textures"])
            )
        except (IndexError, TypeError, ValueError) as exc:
            raise UsageError(f"config.textures: {exc}") from exc
    if "workspace" in doc:
        ws = doc["workspace"]
        try:
            kwargs["workspace"] = WorkspaceBounds(tuple(ws["min"]), tuple(ws["max"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"config.workspace: {exc}") from exc
    for key in ("confounders_per_level", "jitter_pos_per_level", "jitter_yaw_per_level"):
        if key in doc:
            values = doc[key]
            if not isinstance(values, list) or len(values) != 5:
                raise UsageError(f"config.{key}: expected a list of 5 values")
            kwargs[key] = tuple(values)
    merged = {
        "registry": kwargs.get("registry", base.registry),
        "textures": kwargs.get("textures", base.textures),
        "workspace": kwargs.get("workspace", base.workspace),
        "lexicon": base.lexicon,
        "confounders_per_level": tuple(
            kwargs.get("confounders_per_level", base.confounders_per_level)
        ),
        "jitter_pos_per_level": tuple(
            kwargs.get("jitter_pos_per_level", base.jitter_pos_per_level)
        ),
        "jitter_yaw_per_level": tuple(
            kwargs.get("jitter_yaw_per_level", base.jitter_yaw_per_level)
        ),
    }
    return GeneratorConfig(**merged)


def _env_model(doc: Mapping) -> SyntheticEnvModel:
    if "table" in doc:
        rows = doc["table"]
        if not isinstance(rows, list):
            raise UsageError("env-model.table: expected a list of [flags, p] rows")
        table = {}
        for row in rows:
            try:
                flags, p = row
                table[tuple(bool(f) for f in flags)] = float(p)
            except (TypeError, ValueError) as exc:
                raise UsageError(f"env-model.table: bad row {row!r} ({exc})") from exc
        try:
            return SyntheticEnvModel(table)
        except ValueError as exc:
            raise UsageError(f"env-model.table: {exc}") from exc
    base = _require(doc, "base", float, "env-model")
    effects = doc.get("effects", {})
    if not isinstance(effects, dict):
        raise UsageError("env-model.effects: expected a mapping")
    interactions = {}
    for row in doc.get("interactions", []):
        try:
            a, b, w = row
            interactions[(a, b)] = float(w)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"env-model.interactions: bad row {row!r} ({exc})") from exc
    try:
        return SyntheticEnvModel.from_pairwise(base, effects, interactions)
    except ValueError as exc:
        raise UsageError(f"env-model: {exc}") from exc


# ---------------------------------------------------------------------------
# Shared record loading


def _record_paths(args) -> list[str]:
    if args.records:
        return list(args.records)
    pattern = os.path.join(args.run, RECORDS_DIR, "*.json")
    paths = sorted(glob.glob(pattern))
    if not paths:
        raise UsageError(f"no record files given and none found at {pattern}")
    return paths


def _load_record_sets(paths: Sequence[str]) -> dict[str, list[EpisodeRecord]]:
    out: dict[str, list[EpisodeRecord]] = {}
    for path in paths:
        model_id, records = load_records(path)
        if not model_id:
            model_id = os.path.splitext(os.path.basename(path))[0]
        out.setdefault(model_id, []).extend(records)
    return out


def _solved_map(records_by_model: Mapping[str, Sequence[EpisodeRecord]]) -> dict[str, dict[str, bool]]:
    """Per model and task: solved when at least half the trials succeed."""
    out: dict[str, dict[str, bool]] = {}
    for model, records in records_by_model.items():
        counts: dict[str, list[int]] = {}
        for record in records:
            if not any(record.perturbation.flags):
                continue
            cell = counts.setdefault(record.task_id, [0, 0])
            cell[0] += int(record.success)
            cell[1] += 1
        out[model] = {tid: 2 * s >= n for tid, (s, n) in counts.items()}
    return out


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_generate(args) -> int:
    config_doc = load_file(args.config)
    if not isinstance(config_doc, dict):
        raise UsageError("config: expected an object at the top level")
    scenes = _scenes_from_config(config_doc, os.path.dirname(os.path.abspath(args.config)))
    config = _generator_config(config_doc)
    per_cell = config_doc.get("per_cell", 500)
    if not isinstance(per_cell, int) or per_cell < 1:
        raise UsageError("config.per_cell: expected a positive integer")
    dims = config_doc.get("dims", list(DIMENSIONS))
    if not isinstance(dims, list) or not dims:
        raise UsageError("config.dims: expected a non-empty list")
    for dim in dims:
        if dim not in DIMENSIONS:
            raise UsageError(f"config.dims: unknown dimension {dim!r}")
    manifest = generate_variants(scenes, dims, per_cell, args.seed, config)
    out_dir = args.out or os.path.join(args.run, MANIFEST_DIR)
    save_manifest(manifest, out_dir)
    print(f"wrote {len(manifest)} variants to {out_dir}")
    if manifest.shortfalls:
        for cell, missing in sorted(manifest.shortfalls.items()):
            print(f"shortfall {cell}: {missing} variants could not be generated")
    return 0


def _vector_for_entry(entry) -> PerturbationVector:
    spec = PerturbationSpec(
        dimension=entry.dimension,
        sub_dimension=entry.sub_dimension,
        level=entry.level,
        params={},
        seed=entry.seed,
    )
    return PerturbationVector.of(spec)


def _cmd_evaluate(args) -> int:
    manifest_dir = args.manifest or os.path.join(args.run, MANIFEST_DIR)
    manifest = load_manifest(manifest_dir, load_patches=False)
    model = _env_model(load_file(args.env_model))
    tasks = [(e.variant_id, _vector_for_entry(e)) for e in manifest.entries]

    def factory(task_id, vector):
        return SyntheticEnv(task_id, vector, model, salt=args.seed)

    records = run_suite(
        tasks,
        policy=lambda obs: (0.0,) * 7,
        trials_per_task=args.trials,
        env_factory=factory,
        parallelism=args.parallelism,
        max_steps=args.max_steps,
    )
    if args.baseline_trials > 0:
        baseline_tasks = [("baseline", PerturbationVector.none())]
        records = records + run_suite(
            baseline_tasks,
            policy=lambda obs: (0.0,) * 7,
            trials_per_task=args.baseline_trials,
            env_factory=factory,
            parallelism=args.parallelism,
            max_steps=args.max_steps,
        )
    out = args.out or os.path.join(args.run, RECORDS_DIR, f"{args.model}.json")
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    save_records(out, records, model_id=args.model)
    successes = sum(r.success for r in records)
    print(f"wrote {len(records)} records ({successes} successes) to {out}")
    return 0


def _cmd_balance(args) -> int:
    manifest_dir = args.manifest or os.path.join(args.run, MANIFEST_DIR)
    manifest = load_manifest(manifest_dir)
    records_by_model = _load_record_sets(_record_paths(args))
    solved = _solved_map(records_by_model)
    balanced = filter_and_balance(manifest, solved, args.ceiling, args.seed)
    out_dir = args.out or os.path.join(args.run, MANIFEST_DIR + "-balanced")
    save_manifest(balanced, out_dir)
    print(f"kept {len(balanced)} of {len(manifest)} variants; wrote {out_dir}")
    return 0


def _pair_list(arg: str) -> list[tuple[str, str]]:
    if arg == "all":
        return [
            (DIMENSIONS[i], DIMENSIONS[j])
            for i in range(len(DIMENSIONS))
            for j in range(i + 1, len(DIMENSIONS))
        ]
    pairs = []
    for item in arg.split(","):
        parts = item.split(":")
        if len(parts) != 2 or not all(p in DIMENSIONS for p in parts):
            raise UsageError(f"pairs: bad pair {item!r} (use dim:dim or 'all')")
        pairs.append((parts[0], parts[1]))
    return pairs


def _pair_cells(records: Sequence[EpisodeRecord], a: str, b: str):
    """Success/trial counts for the four conditions of one pair.

    Only records whose set dimensions are a subset of {a, b} participate,
    so the unperturbed baseline is shared by every pair.
    """
    cells = {(0, 0): [0, 0], (0, 1): [0, 0], (1, 0): [0, 0], (1, 1): [0, 0]}
    for record in records:
        dims = set(record.perturbation.dimensions)
        if not dims.issubset({a, b}):
            continue
        key = (int(a in dims), int(b in dims))
        cells[key][0] += int(record.success)
        cells[key][1] += 1
    return cells


def _cmd_analyze(args) -> int:
    records_by_model = _load_record_sets(_record_paths(args))
    pairs = _pair_list(args.pairs)
    doc: dict = {"models": {}}
    for model in sorted(records_by_model):
        records = records_by_model[model]
        pair_docs = {}
        tables = {}
        for a, b in pairs:
            cells = _pair_cells(records, a, b)
            if any(n == 0 for _, n in cells.values()):
                continue
            s = {key: cells[key][0] / cells[key][1] for key in cells}
            table = PairSuccessTable(
                s00=s[(0, 0)], s01=s[(0, 1)], s10=s[(1, 0)], s11=s[(1, 1)],
                n_trials=max(1, min(n for _, n in cells.values())),
            )
            tables[(a, b)] = table
            gap = success_conditioned(table)
            entry = {
                "s00": s[(0, 0)], "s01": s[(0, 1)], "s10": s[(1, 0)], "s11": s[(1, 1)],
                "trials": {f"{x}{y}": cells[(x, y)][1] for x, y in cells},
                "p_joint": gap.p_joint,
                "p_i": gap.p_i,
                "p_j": gap.p_j,
                "delta": gap.delta,
            }
            counts = tuple(cells[key][0] for key in ((0, 0), (0, 1), (1, 0), (1, 1)))
            try:
                chi = chi_square(*counts)
                entry["chi_square"] = chi.statistic
                entry["p_value"] = chi.p_value
            except DegenerateTableError:
                entry["chi_square"] = None
                entry["p_value"] = None
            entry["counts"] = {
                "n00": counts[0], "n01": counts[1], "n10": counts[2], "n11": counts[3],
            }
            pair_docs[f"{a}|{b}"] = entry
        model_doc: dict = {"pairs": pair_docs, "matrix": None}
        dims_here = []
        for a, b in tables:
            for name in (a, b):
                if name not in dims_here:
                    dims_here.append(name)
        complete = dims_here and all(
            (x, y) in tables or (y, x) in tables
            for i, x in enumerate(dims_here)
            for y in dims_here[i + 1:]
        )
        if complete:
            matrix, gap_matrix = pairwise_heatmap(tables, dims_here)
            clean = lambda m: [
                [None if math.isnan(v) else float(v) for v in row] for row in m.tolist()
            ]
            model_doc["matrix"] = {
                "dimensions": dims_here,
                "values": clean(matrix),
                "gap": clean(gap_matrix),
            }
        doc["models"][model] = model_doc
    out = args.out or os.path.join(args.run, REPORTS_DIR, "analysis.json")
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    dump_file(out, doc)
    n_pairs = sum(len(m["pairs"]) for m in doc["models"].values())
    print(f"wrote analysis to {out} ({n_pairs} complete pairs)")
    return 0


def _cmd_stratify(args) -> int:
    records_by_model = _load_record_sets(_record_paths(args))
    solved = _solved_map(records_by_model)
    per_variant: dict[str, dict[str, bool]] = {}
    for model, rows in solved.items():
        for vid, ok in rows.items():
            per_variant.setdefault(vid, {})[model] = ok
    strata = stratify(per_variant, n_models=len(solved))
    counts: dict[str, int] = {}
    for level in strata.values():
        counts[str(level.level)] = counts.get(str(level.level), 0) + 1
    out = args.out or os.path.join(args.run, REPORTS_DIR, "strata.json")
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    dump_file(out, {
        "levels": {vid: lvl.level for vid, lvl in strata.items()},
        "counts": counts,
        "n_models": len(solved),
    })
    print(f"wrote {len(strata)} strata to {out}")
    return 0


def _cmd_report(args) -> int:
    records_by_model = _load_record_sets(_record_paths(args))
    report = aggregate(records_by_model)
    table = render_table(report)
    sys.stdout.write(table)
    doc: dict = {"report": report.to_doc(), "table": table}
    if args.strata:
        strata_doc = load_file(args.strata)
        strata = {
            vid: DifficultyLevel(int(level))
            for vid, level in strata_doc["levels"].items()
        }
        doc["level_curves"] = level_curves(records_by_model, strata).to_doc()
    if args.out:
        os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
        dump_file(args.out, doc)
    else:
        out = os.path.join(args.run, REPORTS_DIR, "report.json")
        os.makedirs(os.path.dirname(out), exist_ok=True)
        dump_file(out, doc)
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="perturbench",
        description="Perturbation-robustness benchmark toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--run", default=".", help="run directory (default: current)")

    p = sub.add_parser("generate", help="generate a variant manifest")
    add_common(p)
    p.add_argument("--config", required=True, help="generation config document")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="manifest output directory")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("evaluate", help="run a suite on the synthetic environment")
    add_common(p)
    p.add_argument("--manifest", help="manifest directory")
    p.add_argument("--model", required=True, help="model id to label records with")
    p.add_argument("--env-model", required=True, help="synthetic model document")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--baseline-trials", type=int, default=0)
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--max-steps", type=int, default=600)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="records output file")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("balance", help="ceiling-filter and balance a manifest")
    add_common(p)
    p.add_argument("--manifest", help="manifest directory")
    p.add_argument("--records", nargs="+", help="record documents, one per model")
    p.add_argument("--ceiling", type=float, default=1.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="balanced manifest output directory")
    p.set_defaults(func=_cmd_balance)

    p = sub.add_parser("analyze", help="pairwise compositional statistics")
    add_common(p)
    p.add_argument("--records", nargs="+", help="record documents")
    p.add_argument("--pairs", default="all", help="'all' or comma-separated dim:dim")
    p.add_argument("--out", help="analysis output file")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("stratify", help="difficulty levels from multi-model records")
    add_common(p)
    p.add_argument("--records", nargs="+", help="record documents, one per model")
    p.add_argument("--out", help="strata output file")
    p.set_defaults(func=_cmd_stratify)

    p = sub.add_parser("report", help="success and drop tables")
    add_common(p)
    p.add_argument("--records", nargs="+", help="record documents")
    p.add_argument("--strata", help="strata document for level curves")
    p.add_argument("--out", help="report output file")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except PerturbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
