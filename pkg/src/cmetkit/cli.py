"""Command-line entry point wiring the toolkit pipeline.

Subcommands follow the data flow: ``dict-build`` makes the resolved
lexicon, ``store`` manages the embedding files around the external
encoder, ``split``/``stats`` handle the corpus, ``parse-preds`` decodes
raw model outputs, and ``eval``/``aggregate``/``report`` produce the
final tables.  Every output is written atomically and every run with the
same inputs produces byte-identical files.
"""

from __future__ import annotations

import argparse
import glob
import json
import logging
import sys
from pathlib import Path

from . import FORMAT_VERSION, __version__
from . import corpus as corpus_mod
from . import dictionary, embeddings, metrics, predictions, reporting
from .config import DEFAULT_TAU, RunConfig, load_config
from .errors import DataError, InputError, ToolkitError
from .fmt import pct2
from .jsonl import atomic_write

logger = logging.getLogger("cmetkit")


def _config_from(args: argparse.Namespace) -> RunConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return RunConfig()


def _write_json(path: str | Path, doc: object) -> None:
    atomic_write(path, json.dumps(doc, ensure_ascii=False, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------

def cmd_dict_build(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    table = dictionary.load_dump(args.dump)
    resolved, resolution = dictionary.resolve_references(table)
    dictionary.write_resolved(out_dir / "resolved.jsonl", resolved)
    stats = dictionary.compute_dict_stats(resolved)
    _write_json(out_dir / "dict-stats.json", {
        "parse": {
            "accepted": table.report.accepted,
            "skipped": table.report.skipped,
            "duplicates": table.report.duplicates,
        },
        "resolution": {
            "referencing": resolution.referencing,
            "resolved": resolution.resolved,
            "missing_target": resolution.missing_target,
            "cycles": resolution.cycles,
            "depth_exceeded": resolution.depth_exceeded,
        },
        "stats": _stats_doc(stats),
    })
    print(f"entries={stats.total_entries} skipped={table.report.skipped} "
          f"duplicates={table.report.duplicates} referencing={resolution.referencing} "
          f"resolved={resolution.resolved}")
    return 0


def _stats_doc(stats: dictionary.DictStats) -> dict:
    return {
        "total_entries": stats.total_entries,
        "parseable_fraction": stats.parseable_fraction,
        "polysemy_histogram": {str(k): v for k, v in stats.polysemy_histogram.items()},
        "multi_sense_fraction": stats.multi_sense_fraction,
        "mean_senses": stats.mean_senses,
        "max_senses": stats.max_senses,
        "referencing_entries": stats.referencing_entries,
        "resolved_count": stats.resolved_count,
        "missing_target_count": stats.missing_target_count,
        "cycle_count": stats.cycle_count,
    }


def cmd_dict_stats(args: argparse.Namespace) -> int:
    resolved = dictionary.load_resolved(args.resolved)
    stats = dictionary.compute_dict_stats(resolved)
    rows = dictionary.dict_stats_rows(stats)
    for name, value in rows:
        print(f"{name}: {value}")
    if args.out:
        _write_json(args.out, {"rows": [list(r) for r in rows], "stats": _stats_doc(stats)})
    return 0


def cmd_coverage(args: argparse.Namespace) -> int:
    resolved = dictionary.load_resolved(args.resolved)
    corpus = corpus_mod.load_corpus(args.corpus)
    report = dictionary.compute_coverage(resolved, corpus.vocab())
    print(f"covered={report.covered}/{report.vocab_size} ({pct2(report.coverage_fraction)}%)")
    if args.out:
        _write_json(args.out, {
            "vocab_size": report.vocab_size,
            "covered": report.covered,
            "coverage_fraction": report.coverage_fraction,
            "uncovered_tokens": report.uncovered_tokens,
        })
    return 0


def cmd_store(args: argparse.Namespace) -> int:
    if args.store_action == "build-index":
        resolved = dictionary.load_resolved(args.resolved)
        index, worklist = embeddings.build_index(resolved)
        out_dir = Path(args.out)
        embeddings.write_index(out_dir / "embeddings.index", index)
        embeddings.write_worklist(out_dir / "worklist.jsonl", worklist)
        print(f"rows={len(index)}")
        return 0

    matrix_path = Path(args.dir) / "embeddings.bin"
    index_path = Path(args.dir) / "embeddings.index"
    store = embeddings.load_store(matrix_path, index_path, expected_dim=args.dim)
    if args.store_action == "validate":
        print(f"ok rows={store.rows} dim={store.dim}")
        return 0
    # lookup
    hit = store.lookup(args.token)
    print(json.dumps({
        "token": args.token,
        "oov": hit.oov,
        "row": store.index.get(args.token),
        "l2_norm": float((hit.vector.astype("f8") ** 2).sum() ** 0.5),
    }, ensure_ascii=False))
    return 0


def cmd_split(args: argparse.Namespace) -> int:
    config = _config_from(args)
    ratios = tuple(float(r) for r in args.ratios.split(",")) if args.ratios else config.ratios
    corpus = corpus_mod.load_corpus(args.corpus)
    manifest = corpus_mod.make_split(corpus, seed=args.seed, ratios=ratios)
    corpus_mod.write_manifest(args.out, manifest)
    sizes = {p: len(docs) for p, docs in manifest.partitions.items()}
    print(f"train={sizes.get('train', 0)} dev={sizes.get('dev', 0)} test={sizes.get('test', 0)}")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    corpus = corpus_mod.load_corpus(args.corpus)
    manifest = corpus_mod.load_manifest(args.split) if args.split else None
    stats = corpus_mod.corpus_stats(corpus, manifest)
    rows = corpus_mod.stats_rows(stats)
    header = ("Subset", "Docs", "Sentences", "Tokens", "Metaphor", "%Metaphor")
    widths = [max(len(str(row[i])) for row in [header, *rows]) for i in range(6)]
    for row in [header, *rows]:
        print("  ".join(str(cell).ljust(w) for cell, w in zip(row, widths)).rstrip())
    if args.out:
        _write_json(args.out, {
            "registers": {r: vars(s) for r, s in stats.registers.items()},
            "total": vars(stats.total),
            "partitions": None if stats.partitions is None else {
                p: vars(s) for p, s in stats.partitions.items()
            },
        })
    return 0


def cmd_parse_preds(args: argparse.Namespace) -> int:
    config = _config_from(args)
    tau = args.tau if args.tau is not None else config.tau
    corpus = corpus_mod.load_corpus(args.corpus)
    decoded = predictions.decode_predictions(args.preds, corpus, tau=tau)
    predictions.write_labels(args.out, decoded)
    rate = decoded.parse_failure_rate
    print(f"sentences={len(decoded.labels)} parse_failure_rate={rate:.6f} "
          f"bio_orphans={decoded.bio_orphans}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    corpus = corpus_mod.load_corpus(args.gold)
    if args.split:
        manifest = corpus_mod.load_manifest(args.split)
        parts = corpus_mod.apply_split(corpus, manifest)
        if args.partition not in parts:
            raise DataError(f"manifest has no partition {args.partition!r}")
        corpus = parts[args.partition]
    gold = metrics.gold_labels(corpus)
    all_labels, all_outcomes = predictions.load_labels(args.labels)
    wanted = {g.sent_id for g in gold}
    kept = [(l, o) for l, o in zip(all_labels, all_outcomes) if l.sent_id in wanted]
    labels = [l for l, _ in kept]
    outcomes = [o for _, o in kept]
    counts = metrics.confusion(gold, labels)
    scores = metrics.score(counts)
    breakdown = {}
    if args.register_breakdown:
        breakdown = metrics.per_register(gold, labels, corpus.sentence_registers())
    run = reporting.RunScores(
        config=args.config_name,
        seed=args.seed,
        counts=counts,
        scores=scores,
        per_register=breakdown,
        parse_failure_rate=predictions.failure_rate(outcomes) if outcomes else None,
    )
    reporting.write_run_scores(args.out, run)
    print(f"pos_f1={scores.pos_f1:.6f} macro_f1={scores.macro_f1:.6f} "
          f"precision={scores.pos_precision:.6f} recall={scores.pos_recall:.6f}")
    return 0


def cmd_aggregate(args: argparse.Namespace) -> int:
    paths = sorted(glob.glob(args.runs))
    if not paths:
        raise InputError(f"no run files match {args.runs!r}")
    runs = [reporting.load_run_scores(p) for p in paths]
    agg = reporting.aggregate_runs(runs, config=args.config_name)
    if getattr(args, "config", None):
        expected_seeds = _config_from(args).seeds
        if agg.seeds and set(agg.seeds) != set(expected_seeds):
            logger.warning(
                "aggregated seeds %s differ from the configured seed list %s",
                sorted(agg.seeds), sorted(expected_seeds),
            )
    reporting.write_aggregate(args.out, agg)
    pos = agg.metrics.get("pos_f1")
    if pos is not None:
        print(f"config={agg.config} runs={len(runs)} pos_f1={reporting.format_cell(pos)}")
    else:
        print(f"config={agg.config} runs={len(runs)}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    paths = sorted(Path(args.aggregates).glob("*.json"))
    if not paths:
        raise InputError(f"no aggregate files in {args.aggregates!r}")
    aggregates = [reporting.load_aggregate(p) for p in paths]
    table = reporting.emit_report(aggregates, fmt=args.format)
    out = Path(args.out)
    atomic_write(out, table)
    atomic_write(out.with_suffix(".full.json"), reporting.report_companion(aggregates))
    print(table, end="")
    return 0


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmetkit",
        description="Metaphor-identification experiment toolkit",
    )
    parser.add_argument(
        "--version", action="version",
        version=f"cmetkit {__version__} (format schema v{FORMAT_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dict-build", help="parse a dictionary dump and resolve references")
    p.add_argument("--dump", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_dict_build)

    p = sub.add_parser("dict-stats", help="lexicon statistics from a resolved table")
    p.add_argument("--resolved", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dict_stats)

    p = sub.add_parser("coverage", help="corpus vocabulary coverage of the lexicon")
    p.add_argument("--resolved", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("store", help="embedding store operations")
    store_sub = p.add_subparsers(dest="store_action", required=True)
    q = store_sub.add_parser("build-index", help="row index and encoder worklist")
    q.add_argument("--resolved", required=True)
    q.add_argument("--out", required=True, help="output directory")
    q = store_sub.add_parser("validate", help="validate embeddings.bin/.index")
    q.add_argument("--dir", required=True)
    q.add_argument("--dim", type=int, default=embeddings.DEFAULT_DIM)
    q = store_sub.add_parser("lookup", help="look up one token")
    q.add_argument("token")
    q.add_argument("--dir", required=True)
    q.add_argument("--dim", type=int, default=embeddings.DEFAULT_DIM)
    p.set_defaults(func=cmd_store)

    p = sub.add_parser("split", help="deterministic document-level split")
    p.add_argument("--corpus", required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--ratios", help="train,dev,test (default 0.7,0.1,0.2)")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("stats", help="corpus statistics table")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("parse-preds", help="decode raw predictions into token labels")
    p.add_argument("--preds", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tau", type=float, default=None,
                   help=f"probability threshold (default {DEFAULT_TAU})")
    p.add_argument("--config")
    p.set_defaults(func=cmd_parse_preds)

    p = sub.add_parser("eval", help="score token labels against gold")
    p.add_argument("--gold", required=True, help="gold corpus file")
    p.add_argument("--labels", required=True)
    p.add_argument("--split", help="restrict to one partition of this manifest")
    p.add_argument("--partition", default="test")
    p.add_argument("--register-breakdown", action="store_true")
    p.add_argument("--config-name", default="model")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("aggregate", help="aggregate per-seed score files")
    p.add_argument("--runs", required=True, help="glob of run score files")
    p.add_argument("--config-name")
    p.add_argument("--config", help="warn when seeds differ from the configured list")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("report", help="render the comparison table")
    p.add_argument("--aggregates", required=True, help="directory of aggregate files")
    p.add_argument("--format", choices=("md", "csv"), default="md")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ToolkitError as exc:
        print(f"cmetkit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"cmetkit: DataError: {exc}", file=sys.stderr)
        return DataError.exit_code
    except FileNotFoundError as exc:
        print(f"cmetkit: InputError: {exc}", file=sys.stderr)
        return InputError.exit_code


if __name__ == "__main__":
    sys.exit(main())
