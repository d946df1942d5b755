"""Report surfaces: per-dimension success tables with drops, level curves.

Rates are carried as integer tenths of a percent (round-half-even from the
exact fraction), so the one-decimal table values and the drops derived from
them are exact integer arithmetic, not float formatting.  Machine-readable
output keeps the raw counts and full-precision percentages alongside.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .builder import DifficultyLevel
from .dims import DIMENSIONS
from .errors import CoverageError, MissingBaselineError
from .harness.episodes import EpisodeRecord


@dataclass(frozen=True)
class RateCell:
    """successes/trials with the derived one-decimal percentage."""

    successes: int
    trials: int

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("a rate needs at least one trial")
        if not 0 <= self.successes <= self.trials:
            raise ValueError(f"{self.successes} successes of {self.trials} trials")

    @property
    def tenths(self) -> int:
        """Percentage in tenths, round-half-even (76.5% -> 765)."""
        return round(Fraction(self.successes * 1000, self.trials))

    @property
    def percent(self) -> float:
        return 100.0 * self.successes / self.trials

    @property
    def text(self) -> str:
        return format_tenths(self.tenths)

    def to_doc(self) -> dict:
        return {
            "successes": self.successes,
            "trials": self.trials,
            "percent": self.percent,
            "text": self.text,
        }


def format_tenths(tenths: int) -> str:
    sign = "-" if tenths < 0 else ""
    mag = abs(tenths)
    return f"{sign}{mag // 10}.{mag % 10}"


@dataclass(frozen=True)
class DimensionReport:
    """Per model: original rate, per-dimension rates and absolute drops.

    ``drops`` holds integer tenths (original minus perturbed, exact);
    ``total`` pools every perturbed record of the model.  A dimension with
    no records for a model is absent from its maps rather than zero.
    """

    models: tuple[str, ...]
    original: Mapping[str, RateCell]
    rates: Mapping[str, Mapping[str, RateCell]]
    drops: Mapping[str, Mapping[str, int]]
    total: Mapping[str, RateCell]

    def to_doc(self) -> dict:
        out: dict = {"models": list(self.models), "by_model": {}}
        for model in self.models:
            dims = {}
            for dim, cell in self.rates[model].items():
                dims[dim] = {
                    "rate": cell.to_doc(),
                    "drop_tenths": self.drops[model][dim],
                    "drop": format_tenths(self.drops[model][dim]),
                }
            row: dict = {
                "original": self.original[model].to_doc(),
                "dimensions": dims,
            }
            if model in self.total:
                row["total"] = self.total[model].to_doc()
            out["by_model"][model] = row
        return out


def aggregate(records_by_model: Mapping[str, Sequence[EpisodeRecord]]) -> DimensionReport:
    """Builds the per-dimension success table from labeled records.

    A record with no set flags counts toward the model's original rate; a
    perturbed record counts toward every dimension its vector sets.  A
    model without unperturbed records has no baseline to diff against.
    """
    models = tuple(sorted(records_by_model))
    original: dict[str, RateCell] = {}
    rates: dict[str, dict[str, RateCell]] = {}
    drops: dict[str, dict[str, int]] = {}
    total: dict[str, RateCell] = {}
    for model in models:
        base_n = base_s = 0
        per_dim: dict[str, list[int]] = {}
        total_n = total_s = 0
        for record in records_by_model[model]:
            if not any(record.perturbation.flags):
                base_n += 1
                base_s += int(record.success)
                continue
            total_n += 1
            total_s += int(record.success)
            for dim in record.perturbation.dimensions:
                cell = per_dim.setdefault(dim, [0, 0])
                cell[0] += int(record.success)
                cell[1] += 1
        if base_n == 0:
            raise MissingBaselineError(f"model {model!r} has no unperturbed records")
        original[model] = RateCell(base_s, base_n)
        rates[model] = {}
        drops[model] = {}
        for dim in DIMENSIONS:
            if dim not in per_dim:
                continue
            s, n = per_dim[dim]
            cell = RateCell(s, n)
            rates[model][dim] = cell
            drops[model][dim] = original[model].tenths - cell.tenths
        if total_n:
            total[model] = RateCell(total_s, total_n)
    return DimensionReport(
        models=models, original=original, rates=rates, drops=drops, total=total
    )


def render_table(report: DimensionReport) -> str:
    """Plain-text table: one rate row and one drop row per model."""
    dims = [d for d in DIMENSIONS if any(d in report.rates[m] for m in report.models)]
    headers = ["model", "original"] + dims + ["total"]
    rows: list[list[str]] = []
    for model in report.models:
        rate_row = [model, report.original[model].text]
        drop_row = [f"{model} (drop)", "-"]
        for dim in dims:
            cell = report.rates[model].get(dim)
            rate_row.append(cell.text if cell else "-")
            drop = report.drops[model].get(dim)
            drop_row.append(format_tenths(drop) if drop is not None else "-")
        total = report.total.get(model)
        rate_row.append(total.text if total else "-")
        drop_row.append("-")
        rows.append(rate_row)
        rows.append(drop_row)
    widths = [
        max(len(headers[c]), *(len(r[c]) for r in rows)) for c in range(len(headers))
    ]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LevelCurves:
    """Success rate per (model, dimension, difficulty level)."""

    curves: Mapping[str, Mapping[str, Mapping[int, RateCell]]]

    def to_doc(self) -> dict:
        out: dict = {}
        for model, dims in self.curves.items():
            out[model] = {
                dim: {str(level): cell.to_doc() for level, cell in levels.items()}
                for dim, levels in dims.items()
            }
        return {"curves": out}


def level_curves(
    records_by_model: Mapping[str, Sequence[EpisodeRecord]],
    strata: Mapping[str, DifficultyLevel],
) -> LevelCurves:
    """Groups perturbed records by difficulty level.

    Levels with no trials are absent from the result, never rendered as a
    zero rate.  Unperturbed records are ignored; a perturbed record whose
    task id has no stratum is a coverage error.
    """
    curves: dict[str, dict[str, dict[int, RateCell]]] = {}
    counters: dict[tuple[str, str, int], list[int]] = {}
    for model in sorted(records_by_model):
        for record in records_by_model[model]:
            if not any(record.perturbation.flags):
                continue
            stratum = strata.get(record.task_id)
            if stratum is None:
                raise CoverageError([(record.task_id, model)])
            level = stratum.level if isinstance(stratum, DifficultyLevel) else int(stratum)
            for dim in record.perturbation.dimensions:
                cell = counters.setdefault((model, dim, level), [0, 0])
                cell[0] += int(record.success)
                cell[1] += 1
    for (model, dim, level), (s, n) in counters.items():
        curves.setdefault(model, {}).setdefault(dim, {})[level] = RateCell(s, n)
    return LevelCurves(curves=curves)
