"""Score files, cross-seed aggregation, and report table rendering.

Three artifacts stack up here: per-run score files (one per model+seed),
per-model aggregate files (mean and population std per metric), and the
final table with one row per model configuration.  Rendered cells use
``mean ± std`` at four decimals, half-up; the machine-readable companion
keeps full float precision and is the source of truth.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .errors import FormatError
from .fmt import fixed4
from .jsonl import atomic_write
from .metrics import ConfusionCounts, ScoreSet, SeedAggregate, aggregate_seeds

logger = logging.getLogger(__name__)

# Column order of the report table: metric key -> column header.
REPORT_COLUMNS = (
    ("pos_f1", "Test pos-F1"),
    ("macro_f1", "Macro F1"),
    ("pos_precision", "Precision"),
    ("pos_recall", "Recall"),
    ("academic_f1", "Academic F1"),
    ("fiction_f1", "Fiction F1"),
    ("news_f1", "News F1"),
)


@dataclass
class RunScores:
    """Evaluation result of a single run (one model configuration, one seed)."""

    config: str
    seed: int | None
    counts: ConfusionCounts
    scores: ScoreSet
    per_register: dict[str, ScoreSet]
    parse_failure_rate: float | None = None

    def metric_values(self) -> dict[str, float]:
        values = {
            "pos_f1": self.scores.pos_f1,
            "macro_f1": self.scores.macro_f1,
            "pos_precision": self.scores.pos_precision,
            "pos_recall": self.scores.pos_recall,
        }
        for register, s in self.per_register.items():
            values[f"{register}_f1"] = s.pos_f1
        return values


@dataclass
class ConfigAggregate:
    """Cross-seed aggregate for one model configuration."""

    config: str
    seeds: tuple[int, ...]
    metrics: dict[str, SeedAggregate]


def _scores_to_json(s: ScoreSet) -> dict:
    return {
        "pos_precision": s.pos_precision,
        "pos_recall": s.pos_recall,
        "pos_f1": s.pos_f1,
        "neg_f1": s.neg_f1,
        "macro_f1": s.macro_f1,
    }


def _scores_from_json(doc: dict) -> ScoreSet:
    return ScoreSet(**{k: float(doc[k]) for k in (
        "pos_precision", "pos_recall", "pos_f1", "neg_f1", "macro_f1")})


def write_run_scores(path: str | Path, run: RunScores) -> None:
    doc = {
        "config": run.config,
        "seed": run.seed,
        "counts": {"tp": run.counts.tp, "fp": run.counts.fp, "fn": run.counts.fn, "tn": run.counts.tn},
        "scores": _scores_to_json(run.scores),
        "per_register": {r: _scores_to_json(s) for r, s in sorted(run.per_register.items())},
    }
    if run.parse_failure_rate is not None:
        doc["parse_failure_rate"] = run.parse_failure_rate
    atomic_write(path, json.dumps(doc, ensure_ascii=False, indent=2) + "\n")


def load_run_scores(path: str | Path) -> RunScores:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        counts = doc["counts"]
        return RunScores(
            config=str(doc.get("config", path.stem)),
            seed=None if doc.get("seed") is None else int(doc["seed"]),
            counts=ConfusionCounts(
                int(counts["tp"]), int(counts["fp"]), int(counts["fn"]), int(counts["tn"])
            ),
            scores=_scores_from_json(doc["scores"]),
            per_register={r: _scores_from_json(s) for r, s in doc.get("per_register", {}).items()},
            parse_failure_rate=doc.get("parse_failure_rate"),
        )
    except FileNotFoundError as exc:
        raise FormatError(f"no such file: {path}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: bad score file: {exc}") from exc


def aggregate_runs(runs: list[RunScores], config: str | None = None) -> ConfigAggregate:
    """Aggregate runs of one configuration across seeds.

    Runs are ordered by seed where stamped; every metric present in any
    run must be present in all of them so value lists stay aligned.
    """
    if not runs:
        raise ValueError("no runs to aggregate")
    configs = {r.config for r in runs}
    if config is None:
        if len(configs) > 1:
            raise FormatError(f"runs mix configurations: {sorted(configs)}")
        config = runs[0].config
    if all(r.seed is not None for r in runs):
        runs = sorted(runs, key=lambda r: r.seed)
        seeds = tuple(r.seed for r in runs)
        if len(set(seeds)) != len(seeds):
            raise FormatError(f"duplicate seeds in runs: {seeds}")
    else:
        seeds = ()
    per_run = [r.metric_values() for r in runs]
    keys = set().union(*per_run)
    missing = {k for k in keys for values in per_run if k not in values}
    if missing:
        raise FormatError(f"metric(s) {sorted(missing)} missing from some runs")
    metrics = {
        key: aggregate_seeds([values[key] for values in per_run], seeds)
        for key in sorted(keys)
    }
    return ConfigAggregate(config=config, seeds=seeds, metrics=metrics)


def write_aggregate(path: str | Path, agg: ConfigAggregate) -> None:
    doc = {
        "config": agg.config,
        "seeds": list(agg.seeds),
        "metrics": {
            key: {"values": list(m.values), "mean": m.mean, "std": m.std}
            for key, m in agg.metrics.items()
        },
    }
    atomic_write(path, json.dumps(doc, ensure_ascii=False, indent=2) + "\n")


def load_aggregate(path: str | Path) -> ConfigAggregate:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        seeds = tuple(int(s) for s in doc.get("seeds", ()))
        metrics = {
            key: SeedAggregate(
                values=tuple(float(v) for v in m["values"]),
                mean=float(m["mean"]),
                std=float(m["std"]),
                seeds=seeds,
            )
            for key, m in doc["metrics"].items()
        }
        return ConfigAggregate(config=str(doc.get("config", path.stem)), seeds=seeds, metrics=metrics)
    except FileNotFoundError as exc:
        raise FormatError(f"no such file: {path}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: bad aggregate file: {exc}") from exc


def format_cell(aggregate: SeedAggregate) -> str:
    return f"{fixed4(aggregate.mean)} ± {fixed4(aggregate.std)}"


def emit_report(aggregates: list[ConfigAggregate], fmt: str = "md") -> str:
    """Render the comparison table, one row per configuration.

    Configurations with no metrics at all are dropped with a warning;
    individual missing metrics render as em-blank cells.
    """
    rows = []
    for agg in aggregates:
        if not agg.metrics:
            logger.warning("configuration %r has no metrics; row omitted", agg.config)
            continue
        cells = [
            format_cell(agg.metrics[key]) if key in agg.metrics else ""
            for key, _header in REPORT_COLUMNS
        ]
        rows.append([agg.config, *cells])
    headers = ["Model", *(header for _key, header in REPORT_COLUMNS)]

    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(headers)
        writer.writerows(rows)
        return buf.getvalue()
    if fmt == "md":
        widths = [max(len(str(r[i])) for r in [headers, *rows]) for i in range(len(headers))]
        def line(cells):
            return "| " + " | ".join(str(c).ljust(w) for c, w in zip(cells, widths)) + " |"
        out = [line(headers), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
        out.extend(line(r) for r in rows)
        return "\n".join(out) + "\n"
    raise ValueError(f"unknown report format: {fmt!r}")


def report_companion(aggregates: list[ConfigAggregate]) -> str:
    """Full-precision machine-readable companion for the rendered table."""
    doc = [
        {
            "config": agg.config,
            "seeds": list(agg.seeds),
            "metrics": {
                key: {"values": list(m.values), "mean": m.mean, "std": m.std}
                for key, m in agg.metrics.items()
            },
        }
        for agg in aggregates
    ]
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"
