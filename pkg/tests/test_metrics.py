"""Metric engine against brute-force reference implementations."""

import random
import statistics

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmetkit.errors import DataError
from cmetkit.metrics import (
    ConfusionCounts,
    aggregate_seeds,
    confusion,
    gold_labels,
    per_register,
    register_confusions,
    score,
)
from cmetkit.predictions import TokenLabels


def _reference_counts(gold, pred):
    """Brute-force elementwise reference over flattened (gold, pred) pairs."""
    pairs = []
    pred_by_id = {p.sent_id: p for p in pred}
    for g in gold:
        pairs.extend(zip(g.labels, pred_by_id[g.sent_id].labels))
    return (
        sum(1 for gv, pv in pairs if gv and pv),
        sum(1 for gv, pv in pairs if not gv and pv),
        sum(1 for gv, pv in pairs if gv and not pv),
        sum(1 for gv, pv in pairs if not gv and not pv),
    )


def _reference_scores(tp, fp, fn, tn):
    def prf(tp_, fp_, fn_):
        p = tp_ / (tp_ + fp_) if tp_ + fp_ else 0.0
        r = tp_ / (tp_ + fn_) if tp_ + fn_ else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        return p, r, f

    pos = prf(tp, fp, fn)
    neg = prf(tn, fn, fp)
    return pos, neg, (pos[2] + neg[2]) / 2


def _random_labelled(rng, n_sentences=None, max_tokens=40):
    n_sentences = n_sentences if n_sentences is not None else rng.randint(1, 50)
    gold, pred = [], []
    for i in range(n_sentences):
        n = rng.randint(1, max_tokens)
        gold.append(TokenLabels(f"s{i}", tuple(rng.random() < 0.3 for _ in range(n))))
        pred.append(TokenLabels(f"s{i}", tuple(rng.random() < 0.3 for _ in range(n))))
    return gold, pred


class TestConfusion:
    def test_hand_case(self):
        gold = [TokenLabels("s", (True, False))]
        pred = [TokenLabels("s", (True, True))]
        assert confusion(gold, pred) == ConfusionCounts(tp=1, fp=1, fn=0, tn=0)

    def test_identity(self):
        gold = [TokenLabels("s", (True, False, True))]
        counts = confusion(gold, gold)
        assert counts.fp == 0 and counts.fn == 0

    def test_200_token_fixture_matches_reference(self):
        rng = random.Random(200)
        gold, pred = _random_labelled(rng, n_sentences=10, max_tokens=20)
        counts = confusion(gold, pred)
        assert (counts.tp, counts.fp, counts.fn, counts.tn) == _reference_counts(gold, pred)

    def test_length_mismatch_names_sentence(self):
        gold = [TokenLabels("s9", (True, False))]
        pred = [TokenLabels("s9", (True,))]
        with pytest.raises(DataError, match="'s9'"):
            confusion(gold, pred)

    def test_missing_prediction_rejected(self):
        gold = [TokenLabels("a", (True,)), TokenLabels("b", (False,))]
        with pytest.raises(DataError, match="'b'"):
            confusion(gold, [TokenLabels("a", (True,))])

    def test_extra_prediction_rejected(self):
        gold = [TokenLabels("a", (True,))]
        pred = [TokenLabels("a", (True,)), TokenLabels("ghost", (False,))]
        with pytest.raises(DataError, match="ghost"):
            confusion(gold, pred)

    def test_total_is_token_count(self):
        rng = random.Random(8)
        gold, pred = _random_labelled(rng)
        counts = confusion(gold, pred)
        assert counts.total == sum(len(g.labels) for g in gold)


class TestScore:
    def test_hand_harmonic_mean(self):
        s = score(ConfusionCounts(tp=2, fp=1, fn=1, tn=0))
        assert s.pos_precision == pytest.approx(2 / 3)
        assert s.pos_recall == pytest.approx(2 / 3)
        assert s.pos_f1 == pytest.approx(2 / 3)

    def test_degenerate_zero_convention(self):
        s = score(ConfusionCounts(tp=0, fp=0, fn=0, tn=7))
        assert s.pos_precision == 0.0
        assert s.pos_recall == 0.0
        assert s.pos_f1 == 0.0

    def test_perfect(self):
        s = score(ConfusionCounts(tp=5, fp=0, fn=0, tn=5))
        assert s.pos_f1 == 1.0
        assert s.neg_f1 == 1.0
        assert s.macro_f1 == 1.0

    def test_macro_is_mean_of_class_f1(self):
        rng = random.Random(4)
        for _ in range(100):
            counts = ConfusionCounts(*(rng.randint(0, 30) for _ in range(4)))
            s = score(counts)
            assert s.macro_f1 == pytest.approx((s.pos_f1 + s.neg_f1) / 2)

    def test_polarity_swap_symmetry(self):
        rng = random.Random(5)
        for _ in range(100):
            counts = ConfusionCounts(*(rng.randint(0, 30) for _ in range(4)))
            swapped = ConfusionCounts(tp=counts.tn, fp=counts.fn, fn=counts.fp, tn=counts.tp)
            s, sw = score(counts), score(swapped)
            assert sw.pos_f1 == pytest.approx(s.neg_f1)
            assert sw.neg_f1 == pytest.approx(s.pos_f1)
            assert sw.macro_f1 == pytest.approx(s.macro_f1)

    def test_extra_correct_positive_never_lowers_pos_f1(self):
        rng = random.Random(6)
        for _ in range(200):
            counts = ConfusionCounts(*(rng.randint(0, 20) for _ in range(4)))
            grown = ConfusionCounts(counts.tp + 1, counts.fp, counts.fn, counts.tn)
            assert score(grown).pos_f1 >= score(counts).pos_f1 - 1e-15


class TestPerRegister:
    def _fixture(self, rng, registers=("academic", "news", "fiction")):
        gold, pred, register_map = [], [], {}
        for i in range(rng.randint(3, 30)):
            n = rng.randint(1, 15)
            sid = f"s{i}"
            gold.append(TokenLabels(sid, tuple(rng.random() < 0.3 for _ in range(n))))
            pred.append(TokenLabels(sid, tuple(rng.random() < 0.3 for _ in range(n))))
            register_map[sid] = rng.choice(registers)
        return gold, pred, register_map

    def test_single_register_equals_overall(self):
        rng = random.Random(9)
        gold, pred, _ = self._fixture(rng)
        register_map = {g.sent_id: "news" for g in gold}
        breakdown = per_register(gold, pred, register_map)
        assert set(breakdown) == {"news"}
        assert breakdown["news"] == score(confusion(gold, pred))

    def test_perfect_and_all_wrong(self):
        gold = [TokenLabels("a", (True, False)), TokenLabels("b", (True, False))]
        pred = [TokenLabels("a", (True, False)), TokenLabels("b", (False, True))]
        breakdown = per_register(gold, pred, {"a": "academic", "b": "fiction"})
        assert breakdown["academic"].pos_f1 == 1.0
        assert breakdown["fiction"].pos_f1 == 0.0

    def test_matches_filter_then_score_oracle(self):
        rng = random.Random(10)
        for _ in range(20):
            gold, pred, register_map = self._fixture(rng)
            breakdown = per_register(gold, pred, register_map)
            pred_by_id = {p.sent_id: p for p in pred}
            for register, got in breakdown.items():
                subset = [g for g in gold if register_map[g.sent_id] == register]
                subset_pred = [pred_by_id[g.sent_id] for g in subset]
                assert got == score(confusion(subset, subset_pred))

    def test_register_confusions_sum_to_overall(self):
        rng = random.Random(11)
        for _ in range(20):
            gold, pred, register_map = self._fixture(rng)
            overall = confusion(gold, pred)
            parts = register_confusions(gold, pred, register_map)
            summed = ConfusionCounts()
            for counts in parts.values():
                summed = summed + counts
            assert summed == overall

    def test_missing_register_rejected(self):
        gold = [TokenLabels("a", (True,))]
        with pytest.raises(DataError, match="no register"):
            per_register(gold, gold, {})


class TestAggregateSeeds:
    def test_population_std_two_values(self):
        agg = aggregate_seeds([0.5, 0.7])
        assert agg.mean == pytest.approx(0.6, abs=1e-12)
        # ddof=0 gives 0.1; the sample std would be ~0.1414.
        assert agg.std == pytest.approx(0.1, abs=1e-12)
        assert abs(agg.std - statistics.stdev([0.5, 0.7])) > 0.04

    def test_single_value(self):
        agg = aggregate_seeds([0.42])
        assert agg.mean == 0.42
        assert agg.std == 0.0

    def test_matches_two_pass_oracle(self):
        rng = random.Random(12)
        for _ in range(100):
            values = [rng.random() for _ in range(5)]
            agg = aggregate_seeds(values)
            mean = sum(values) / len(values)
            std = (sum((v - mean) ** 2 for v in values) / len(values)) ** 0.5
            assert agg.mean == pytest.approx(mean, abs=1e-12)
            assert agg.std == pytest.approx(std, abs=1e-12)
            # Library cross-check on the same values.
            assert agg.std == pytest.approx(statistics.pstdev(values), abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            aggregate_seeds([])

    @settings(max_examples=100)
    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=10))
    def test_permutation_invariant(self, values):
        rng = random.Random(0)
        base = aggregate_seeds(values)
        shuffled = list(values)
        rng.shuffle(shuffled)
        again = aggregate_seeds(shuffled)
        assert again.mean == pytest.approx(base.mean, abs=1e-9)
        assert again.std == pytest.approx(base.std, abs=1e-9)

    def test_seed_list_recorded(self):
        agg = aggregate_seeds([0.1, 0.2], seeds=[42, 123])
        assert agg.seeds == (42, 123)


class TestGoldLabels:
    def test_extraction(self, small_corpus):
        labels = gold_labels(small_corpus)
        assert [l.sent_id for l in labels] == ["a1", "a2", "n1", "n2", "n3"]
        assert labels[0].labels == (False, True, False)


class TestOracleEquivalence:
    def test_thousand_random_fixtures(self):
        # Exact agreement with the brute-force reference on desk-scale data.
        rng = random.Random(1000)
        for _ in range(1000):
            gold, pred = _random_labelled(rng, n_sentences=rng.randint(1, 50), max_tokens=40)
            counts = confusion(gold, pred)
            tp, fp, fn, tn = _reference_counts(gold, pred)
            assert (counts.tp, counts.fp, counts.fn, counts.tn) == (tp, fp, fn, tn)
            got = score(counts)
            (pp, pr, pf), (_, _, nf), macro = _reference_scores(tp, fp, fn, tn)
            assert got.pos_precision == pp
            assert got.pos_recall == pr
            assert got.pos_f1 == pf
            assert got.neg_f1 == nf
            assert got.macro_f1 == macro
