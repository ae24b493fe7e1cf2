"""Shared fixture builders for corpus and prediction tests."""

import random

import pytest

from cmetkit.corpus import REGISTERS, Corpus, load_corpus
from cmetkit.jsonl import write_records

SURFACES = ["他", "像", "风", "一样", "跑", "山", "吃", "掉", "了", "光", "水", "流"]


def sentence_record(doc_id, register, sent_id, surfaces, labels):
    return {
        "doc_id": doc_id,
        "register": register,
        "sent_id": sent_id,
        "tokens": [
            {"surface": s, "label": int(l)} for s, l in zip(surfaces, labels, strict=True)
        ],
    }


def random_corpus(rng: random.Random, n_docs=None, max_sentences=6, max_tokens=10) -> list[dict]:
    """Record list for a random well-formed corpus."""
    n_docs = n_docs or rng.randint(1, 8)
    records = []
    sent_counter = 0
    for d in range(n_docs):
        register = rng.choice(REGISTERS)
        for _ in range(rng.randint(1, max_sentences)):
            n = rng.randint(1, max_tokens)
            surfaces = [rng.choice(SURFACES) for _ in range(n)]
            labels = [rng.random() < 0.2 for _ in range(n)]
            records.append(sentence_record(f"doc{d:03d}", register, f"s{sent_counter}", surfaces, labels))
            sent_counter += 1
    return records


def corpus_from_records(tmp_path, records, name="corpus.jsonl") -> Corpus:
    path = tmp_path / name
    write_records(path, records)
    return load_corpus(path)


@pytest.fixture
def small_corpus(tmp_path) -> Corpus:
    """Two-register fixture: 3 docs, 5 sentences, hand-set labels."""
    records = [
        sentence_record("acad-1", "academic", "a1", ["经济", "起飞", "了"], [0, 1, 0]),
        sentence_record("acad-1", "academic", "a2", ["数据", "说明", "问题"], [0, 0, 0]),
        sentence_record("news-1", "news", "n1", ["他", "像", "风", "一样", "跑"], [0, 0, 1, 0, 0]),
        sentence_record("news-1", "news", "n2", ["市场", "回暖"], [0, 1]),
        sentence_record("news-2", "news", "n3", ["水", "流", "不", "停"], [0, 0, 0, 0]),
    ]
    return corpus_from_records(tmp_path, records)
