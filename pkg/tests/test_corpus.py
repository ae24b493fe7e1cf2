"""Corpus loading, statistics, and marker scan."""

import random

import pytest

from cmetkit.corpus import (
    Corpus,
    Sentence,
    AnnotatedToken,
    corpus_stats,
    load_corpus,
    make_split,
    mflag_scan,
    stats_rows,
    write_corpus,
)
from cmetkit.errors import DataError, FormatError
from cmetkit.jsonl import write_records

from conftest import corpus_from_records, random_corpus, sentence_record


class TestLoadCorpus:
    def test_small_fixture_counts(self, tmp_path):
        corpus = corpus_from_records(tmp_path, [
            sentence_record("d1", "fiction", "s1", ["他", "跑", "了"], [0, 1, 0]),
        ])
        assert len(corpus.documents) == 1
        doc = corpus.documents[0]
        assert doc.register == "fiction"
        assert len(doc.sentences) == 1
        assert len(doc.sentences[0].tokens) == 3

    def test_duplicate_doc_id_rejected(self, tmp_path):
        records = [
            sentence_record("d1", "news", "s1", ["a"], [0]),
            sentence_record("d2", "news", "s2", ["b"], [0]),
            sentence_record("d1", "news", "s3", ["c"], [0]),
        ]
        with pytest.raises(FormatError, match="duplicate document"):
            corpus_from_records(tmp_path, records)

    def test_unknown_register_rejected(self, tmp_path):
        with pytest.raises(FormatError, match="register"):
            corpus_from_records(tmp_path, [sentence_record("d1", "poetry", "s1", ["a"], [0])])

    def test_error_names_line_and_field(self, tmp_path):
        records = [
            sentence_record("d1", "news", "s1", ["a"], [0]),
            {"doc_id": "d1", "register": "news", "sent_id": "s2", "tokens": [{"surface": "x", "label": 3}]},
        ]
        path = tmp_path / "corpus.jsonl"
        write_records(path, records)
        with pytest.raises(FormatError, match=r":2: field 'tokens\[0\].label'"):
            load_corpus(path)

    def test_empty_sentence_rejected(self, tmp_path):
        with pytest.raises(FormatError, match="tokens"):
            corpus_from_records(tmp_path, [
                {"doc_id": "d1", "register": "news", "sent_id": "s1", "tokens": []},
            ])

    def test_duplicate_sent_id_rejected(self, tmp_path):
        records = [
            sentence_record("d1", "news", "s1", ["a"], [0]),
            sentence_record("d1", "news", "s1", ["b"], [0]),
        ]
        with pytest.raises(FormatError, match="sent_id"):
            corpus_from_records(tmp_path, records)

    def test_register_change_within_doc_rejected(self, tmp_path):
        records = [
            sentence_record("d1", "news", "s1", ["a"], [0]),
            sentence_record("d1", "fiction", "s2", ["b"], [0]),
        ]
        with pytest.raises(FormatError, match="changes register"):
            corpus_from_records(tmp_path, records)

    def test_round_trip(self, tmp_path):
        rng = random.Random(11)
        records = random_corpus(rng, n_docs=5)
        corpus = corpus_from_records(tmp_path, records)
        write_corpus(tmp_path / "copy.jsonl", corpus)
        again = load_corpus(tmp_path / "copy.jsonl")
        assert again == corpus

    def test_numeric_sent_ids_canonicalized(self, tmp_path):
        corpus = corpus_from_records(tmp_path, [
            {"doc_id": "d1", "register": "news", "sent_id": 7,
             "tokens": [{"surface": "a", "label": 0}]},
        ])
        assert corpus.documents[0].sentences[0].sent_id == "7"


def _count_oracle(records):
    """Independent counting pass over raw records."""
    by_register = {}
    for rec in records:
        row = by_register.setdefault(rec["register"], [set(), 0, 0, 0])
        row[0].add(rec["doc_id"])
        row[1] += 1
        row[2] += len(rec["tokens"])
        row[3] += sum(t["label"] for t in rec["tokens"])
    return {
        r: (len(d), s, t, m) for r, (d, s, t, m) in by_register.items()
    }


class TestCorpusStats:
    def test_simple_fraction(self, tmp_path):
        corpus = corpus_from_records(tmp_path, [
            sentence_record("d1", "news", "s1", list("abcdefghij"), [1] + [0] * 9),
        ])
        stats = corpus_stats(corpus)
        assert stats.total.tokens == 10
        assert stats.total.metaphor == 1
        assert stats.total.metaphor_fraction == pytest.approx(0.10)

    def test_two_register_rows_sum_to_totals(self, small_corpus):
        stats = corpus_stats(small_corpus)
        assert set(stats.registers) == {"academic", "news"}
        for field in ("docs", "sentences", "tokens", "metaphor"):
            assert sum(getattr(r, field) for r in stats.registers.values()) == getattr(stats.total, field)

    def test_matches_independent_counting_pass(self, tmp_path):
        rng = random.Random(23)
        records = random_corpus(rng, n_docs=7)
        corpus = corpus_from_records(tmp_path, records)
        stats = corpus_stats(corpus)
        for register, (docs, sents, toks, mets) in _count_oracle(records).items():
            row = stats.registers[register]
            assert (row.docs, row.sentences, row.tokens, row.metaphor) == (docs, sents, toks, mets)

    def test_partition_rows_sum_to_totals(self, tmp_path):
        rng = random.Random(31)
        records = random_corpus(rng, n_docs=9)
        corpus = corpus_from_records(tmp_path, records)
        manifest = make_split(corpus, seed=42)
        stats = corpus_stats(corpus, manifest)
        for field in ("docs", "sentences", "tokens", "metaphor"):
            assert sum(getattr(r, field) for r in stats.partitions.values()) == getattr(stats.total, field)

    def test_unknown_doc_in_manifest_rejected(self, small_corpus):
        manifest = make_split(["x", "y", "z"], seed=1)
        with pytest.raises(DataError, match="unknown documents"):
            corpus_stats(small_corpus, manifest)

    def test_rendered_rows(self, small_corpus):
        rows = stats_rows(corpus_stats(small_corpus))
        names = [r[0] for r in rows]
        assert names == ["Academic", "News", "Total"]
        total = rows[-1]
        assert total[1:5] == (3, 5, 17, 3)
        assert total[5] == "17.65"  # 3/17, half-up at 2 decimals


class TestMflagScan:
    def test_pre_source(self):
        sent = Sentence("s", tuple(AnnotatedToken(s, False) for s in ["他", "像", "风"]))
        assert mflag_scan(sent) == [(1, "pre-source")]

    def test_post_source(self):
        sent = Sentence("s", tuple(AnnotatedToken(s, False) for s in ["风", "一样"]))
        assert mflag_scan(sent) == [(1, "post-source")]

    def test_no_markers(self):
        sent = Sentence("s", tuple(AnnotatedToken(s, False) for s in ["经济", "起飞"]))
        assert mflag_scan(sent) == []

    def test_all_marker_words_recognized(self):
        surfaces = ["像", "好像", "如", "如同", "犹如", "好比", "一样", "似的", "般"]
        sent = Sentence("s", tuple(AnnotatedToken(s, False) for s in surfaces))
        kinds = [k for _, k in mflag_scan(sent)]
        assert kinds == ["pre-source"] * 6 + ["post-source"] * 3

    def test_gold_labels_untouched(self, small_corpus):
        before = [
            [tok.metaphor for tok in sent.tokens] for _, sent in small_corpus.sentences()
        ]
        for _, sent in small_corpus.sentences():
            mflag_scan(sent)
        after = [
            [tok.metaphor for tok in sent.tokens] for _, sent in small_corpus.sentences()
        ]
        assert before == after

    def test_marker_inside_compound_not_matched(self):
        # Only exact surface matches count; 像样 is not a marker.
        sent = Sentence("s", (AnnotatedToken("像样", False),))
        assert mflag_scan(sent) == []
