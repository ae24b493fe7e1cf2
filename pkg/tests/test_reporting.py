"""Score files, aggregation across seeds, and table rendering."""

import json

import pytest

from cmetkit.errors import FormatError
from cmetkit.metrics import ConfusionCounts, SeedAggregate, aggregate_seeds, score
from cmetkit.reporting import (
    ConfigAggregate,
    RunScores,
    aggregate_runs,
    emit_report,
    format_cell,
    load_aggregate,
    load_run_scores,
    report_companion,
    write_aggregate,
    write_run_scores,
)


def _run(config, seed, tp, fp, fn, tn, registers=("academic", "news")):
    counts = ConfusionCounts(tp, fp, fn, tn)
    return RunScores(
        config=config,
        seed=seed,
        counts=counts,
        scores=score(counts),
        per_register={r: score(counts) for r in registers},
    )


class TestRunScoresFile:
    def test_round_trip(self, tmp_path):
        run = _run("roberta", 42, 10, 3, 4, 80)
        path = tmp_path / "roberta_seed42.json"
        write_run_scores(path, run)
        loaded = load_run_scores(path)
        assert loaded == run

    def test_bad_file_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{}", encoding="utf-8")
        with pytest.raises(FormatError):
            load_run_scores(path)


class TestAggregateRuns:
    def test_orders_by_seed(self):
        runs = [_run("m", s, 10 + s % 3, 3, 4, 80) for s in (123, 42, 7)]
        agg = aggregate_runs(runs)
        assert agg.seeds == (7, 42, 123)
        assert agg.config == "m"
        assert set(agg.metrics) >= {"pos_f1", "macro_f1", "pos_precision", "pos_recall", "academic_f1"}

    def test_mixed_configs_rejected(self):
        with pytest.raises(FormatError, match="mix"):
            aggregate_runs([_run("a", 1, 1, 1, 1, 1), _run("b", 2, 1, 1, 1, 1)])

    def test_duplicate_seeds_rejected(self):
        with pytest.raises(FormatError, match="duplicate seeds"):
            aggregate_runs([_run("a", 1, 1, 1, 1, 1), _run("a", 1, 2, 1, 1, 1)])

    def test_metric_gap_rejected(self):
        complete = _run("a", 1, 1, 1, 1, 1)
        partial = _run("a", 2, 1, 1, 1, 1, registers=("academic",))
        with pytest.raises(FormatError, match="missing"):
            aggregate_runs([complete, partial])

    def test_values_follow_seed_order(self):
        runs = [_run("m", 123, 0, 0, 10, 90), _run("m", 42, 10, 0, 0, 90)]
        agg = aggregate_runs(runs)
        assert agg.metrics["pos_f1"].values == (1.0, 0.0)  # seed 42 first

    def test_aggregate_file_round_trip(self, tmp_path):
        agg = aggregate_runs([_run("m", s, 10 + s % 5, 3, 4, 80) for s in (42, 123, 2024, 7, 31415)])
        path = tmp_path / "m.json"
        write_aggregate(path, agg)
        loaded = load_aggregate(path)
        assert loaded.config == agg.config
        assert loaded.seeds == agg.seeds
        for key, m in agg.metrics.items():
            got = loaded.metrics[key]
            # Full-precision round trip: floats must be identical.
            assert got.values == m.values
            assert got.mean == m.mean
            assert got.std == m.std


class TestRendering:
    def test_cell_formatting_half_up(self):
        cell = format_cell(SeedAggregate(values=(0.71423,), mean=0.71423, std=0.01214))
        assert cell == "0.7142 ± 0.0121"

    def test_cell_rounds_half_up_not_bankers(self):
        cell = format_cell(SeedAggregate(values=(0.71425,), mean=0.71425, std=0.00005))
        assert cell == "0.7143 ± 0.0001"

    def test_markdown_table(self):
        agg = ConfigAggregate(
            config="roberta",
            seeds=(42,),
            metrics={"pos_f1": aggregate_seeds([0.7142]), "macro_f1": aggregate_seeds([0.8421])},
        )
        table = emit_report([agg], fmt="md")
        lines = table.splitlines()
        assert lines[0].startswith("| Model")
        assert "roberta" in lines[2]
        assert "0.7142 ± 0.0000" in lines[2]

    def test_csv_table(self):
        agg = ConfigAggregate(
            config="roberta",
            seeds=(42,),
            metrics={"pos_f1": aggregate_seeds([0.7142])},
        )
        table = emit_report([agg], fmt="csv")
        lines = table.splitlines()
        assert lines[0].split(",")[:3] == ["Model", "Test pos-F1", "Macro F1"]
        assert lines[1].split(",")[0] == "roberta"

    def test_empty_config_row_omitted(self, caplog):
        agg = ConfigAggregate(config="ghost", seeds=(), metrics={})
        table = emit_report([agg], fmt="md")
        assert "ghost" not in table

    def test_unknown_format_rejected(self):
        with pytest.raises(ValueError):
            emit_report([], fmt="pdf")

    def test_companion_round_trips(self, tmp_path):
        agg = ConfigAggregate(
            config="m",
            seeds=(42, 7),
            metrics={"pos_f1": aggregate_seeds([0.71423, 0.73851], seeds=[42, 7])},
        )
        text = report_companion([agg])
        doc = json.loads(text)
        assert doc[0]["metrics"]["pos_f1"]["mean"] == agg.metrics["pos_f1"].mean
        assert doc[0]["metrics"]["pos_f1"]["values"] == list(agg.metrics["pos_f1"].values)
