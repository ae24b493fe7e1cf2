"""Annotated corpus: loading, statistics, document-level split, markers.

The corpus file is JSONL with one sentence per line::

    {"doc_id": "...", "register": "academic|news|fiction",
     "sent_id": "...", "tokens": [{"surface": "...", "label": 0|1}, ...]}

Sentences of a document must be contiguous; sentence ids are unique across
the whole corpus so prediction files can join on them alone.

The train/dev/test split is document-level: a seeded shuffle of the sorted
document ids, assigned contiguously.  The shuffle is part of the file
format contract, not a library detail, so any implementation reproduces
identical manifests:

* generator state ``s`` is a uint64 starting at the seed; each draw is
  ``s = (6364136223846793005 * s + 1442695040888963407) mod 2^64`` and
  yields the top 31 bits ``s >> 33``;
* the sorted id list is Fisher-Yates shuffled from the back
  (``j = draw % (i + 1)``);
* sizes are ``train = floor(train_ratio * N)``,
  ``test = floor(test_ratio * N + 1/2)``, ``dev`` the remainder, with the
  ratios read as exact decimal fractions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import DataError, FormatError
from .jsonl import atomic_write, read_records, write_records

REGISTERS = ("academic", "news", "fiction")
PARTITIONS = ("train", "dev", "test")
DEFAULT_RATIOS = (0.7, 0.1, 0.2)

# Direct-metaphor signal words; diagnostic only, they never carry a
# positive gold label themselves.
PRE_SOURCE_MARKERS = ("像", "好像", "如", "如同", "犹如", "好比")
POST_SOURCE_MARKERS = ("一样", "似的", "般")

_LCG_MULT = 6364136223846793005
_LCG_INC = 1442695040888963407
_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class AnnotatedToken:
    surface: str
    metaphor: bool


@dataclass(frozen=True)
class Sentence:
    sent_id: str
    tokens: tuple[AnnotatedToken, ...]


@dataclass(frozen=True)
class Document:
    doc_id: str
    register: str
    sentences: tuple[Sentence, ...]


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]

    def sentences(self) -> Iterator[tuple[Document, Sentence]]:
        for doc in self.documents:
            for sentence in doc.sentences:
                yield doc, sentence

    def doc_ids(self) -> list[str]:
        return [doc.doc_id for doc in self.documents]

    def vocab(self) -> set[str]:
        return {tok.surface for _, sent in self.sentences() for tok in sent.tokens}

    def sentence_registers(self) -> dict[str, str]:
        return {sent.sent_id: doc.register for doc, sent in self.sentences()}


@dataclass(frozen=True)
class SplitManifest:
    seed: int
    ratios: tuple[float, float, float]
    partitions: dict[str, list[str]]

    def partition_of(self) -> dict[str, str]:
        return {doc: part for part, docs in self.partitions.items() for doc in docs}


@dataclass
class StatsRow:
    docs: int = 0
    sentences: int = 0
    tokens: int = 0
    metaphor: int = 0

    @property
    def metaphor_fraction(self) -> float:
        return self.metaphor / self.tokens if self.tokens else 0.0

    def add_document(self, doc: Document) -> None:
        self.docs += 1
        for sent in doc.sentences:
            self.sentences += 1
            self.tokens += len(sent.tokens)
            self.metaphor += sum(tok.metaphor for tok in sent.tokens)


@dataclass
class CorpusStats:
    registers: dict[str, StatsRow]
    total: StatsRow
    partitions: dict[str, StatsRow] | None = None


# ---------------------------------------------------------------------------
# Loading and writing
# ---------------------------------------------------------------------------

def _parse_sentence(source: str, lineno: int, rec: object) -> tuple[str, str, Sentence]:
    if not isinstance(rec, Mapping):
        raise FormatError(f"{source}:{lineno}: expected an object")

    def need(field: str) -> object:
        if field not in rec:
            raise FormatError.at(source, lineno, field, "missing")
        return rec[field]

    doc_id = need("doc_id")
    if not isinstance(doc_id, str) or not doc_id:
        raise FormatError.at(source, lineno, "doc_id", "must be a non-empty string")
    register = need("register")
    if register not in REGISTERS:
        raise FormatError.at(source, lineno, "register", f"unknown value {register!r}")
    sent_id = need("sent_id")
    if isinstance(sent_id, int):
        sent_id = str(sent_id)
    if not isinstance(sent_id, str) or not sent_id:
        raise FormatError.at(source, lineno, "sent_id", "must be a non-empty string")
    raw_tokens = need("tokens")
    if not isinstance(raw_tokens, Sequence) or isinstance(raw_tokens, str) or not raw_tokens:
        raise FormatError.at(source, lineno, "tokens", "must be a non-empty array")
    tokens = []
    for i, tok in enumerate(raw_tokens):
        if not isinstance(tok, Mapping):
            raise FormatError.at(source, lineno, f"tokens[{i}]", "must be an object")
        surface = tok.get("surface")
        if not isinstance(surface, str) or not surface:
            raise FormatError.at(source, lineno, f"tokens[{i}].surface", "must be a non-empty string")
        label = tok.get("label")
        if label not in (0, 1):
            raise FormatError.at(source, lineno, f"tokens[{i}].label", "must be 0 or 1")
        tokens.append(AnnotatedToken(surface, bool(label)))
    return doc_id, register, Sentence(sent_id, tuple(tokens))


def load_corpus(path: str | Path) -> Corpus:
    """Load and validate a corpus file.

    Document blocks must be contiguous (a doc_id reappearing after another
    document started is a duplicate), registers must be consistent within
    a document, and sentence ids must be unique corpus-wide.
    """
    source = str(path)
    documents: list[Document] = []
    finished: set[str] = set()
    seen_sent_ids: set[str] = set()
    current_id: str | None = None
    current_register = ""
    current_sentences: list[Sentence] = []

    def flush() -> None:
        nonlocal current_id
        if current_id is not None:
            documents.append(Document(current_id, current_register, tuple(current_sentences)))
            finished.add(current_id)
            current_id = None
            current_sentences.clear()

    for lineno, rec in read_records(path):
        doc_id, register, sentence = _parse_sentence(source, lineno, rec)
        if doc_id != current_id:
            if doc_id in finished:
                raise FormatError.at(source, lineno, "doc_id", f"duplicate document {doc_id!r}")
            flush()
            current_id = doc_id
            current_register = register
        elif register != current_register:
            raise FormatError.at(
                source, lineno, "register",
                f"document {doc_id!r} changes register from {current_register!r}",
            )
        if sentence.sent_id in seen_sent_ids:
            raise FormatError.at(source, lineno, "sent_id", f"duplicate {sentence.sent_id!r}")
        seen_sent_ids.add(sentence.sent_id)
        current_sentences.append(sentence)
    flush()
    if not documents:
        raise FormatError(f"{source}: corpus is empty")
    return Corpus(tuple(documents))


def write_corpus(path: str | Path, corpus: Corpus) -> None:
    write_records(
        path,
        (
            {
                "doc_id": doc.doc_id,
                "register": doc.register,
                "sent_id": sent.sent_id,
                "tokens": [
                    {"surface": t.surface, "label": int(t.metaphor)} for t in sent.tokens
                ],
            }
            for doc, sent in corpus.sentences()
        ),
    )


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

def corpus_stats(corpus: Corpus, manifest: SplitManifest | None = None) -> CorpusStats:
    """Exact per-register (and optionally per-partition) counts."""
    registers = {r: StatsRow() for r in REGISTERS}
    total = StatsRow()
    for doc in corpus.documents:
        registers[doc.register].add_document(doc)
        total.add_document(doc)
    registers = {r: row for r, row in registers.items() if row.docs}

    partitions = None
    if manifest is not None:
        known = set(corpus.doc_ids())
        unknown = [d for docs in manifest.partitions.values() for d in docs if d not in known]
        if unknown:
            raise DataError(f"split manifest references unknown documents: {sorted(unknown)}")
        membership = manifest.partition_of()
        partitions = {p: StatsRow() for p in PARTITIONS}
        for doc in corpus.documents:
            part = membership.get(doc.doc_id)
            if part is not None:
                partitions[part].add_document(doc)
    return CorpusStats(registers=registers, total=total, partitions=partitions)


def stats_rows(stats: CorpusStats) -> list[tuple[str, int, int, int, int, str]]:
    """Render rows: subset, docs, sentences, tokens, metaphor, %metaphor."""
    from .fmt import pct2

    def row(name: str, r: StatsRow) -> tuple[str, int, int, int, int, str]:
        return (name, r.docs, r.sentences, r.tokens, r.metaphor, pct2(r.metaphor_fraction))

    out = [row(reg.capitalize(), stats.registers[reg]) for reg in REGISTERS if reg in stats.registers]
    out.append(row("Total", stats.total))
    if stats.partitions is not None:
        out.extend(row(p.capitalize(), stats.partitions[p]) for p in PARTITIONS)
    return out


# ---------------------------------------------------------------------------
# Document-level split
# ---------------------------------------------------------------------------

def _lcg_shuffle(items: list[str], seed: int) -> list[str]:
    state = seed & _U64
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        state = (_LCG_MULT * state + _LCG_INC) & _U64
        j = (state >> 33) % (i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def _exact_ratio(value: float) -> Fraction:
    # Ratios are written as short decimals (0.7, 0.1, ...); recover the
    # intended fraction rather than the float's binary expansion.
    return Fraction(value).limit_denominator(10_000)


def partition_sizes(n_docs: int, ratios: Sequence[float]) -> tuple[int, int, int]:
    """Deterministic partition sizes: floor / half-up round / remainder."""
    train_r, dev_r, test_r = (_exact_ratio(r) for r in ratios)
    if min(train_r, dev_r, test_r) < 0 or train_r + dev_r + test_r != 1:
        raise DataError(f"split ratios must be non-negative and sum to 1, got {tuple(ratios)}")
    train = int(train_r * n_docs)
    test = int(test_r * n_docs + Fraction(1, 2))
    dev = n_docs - train - test
    if dev < 0:
        raise DataError(f"ratios {tuple(ratios)} produce a negative dev partition for {n_docs} documents")
    return train, dev, test


def make_split(
    corpus: Corpus | Iterable[str],
    seed: int,
    ratios: Sequence[float] = DEFAULT_RATIOS,
) -> SplitManifest:
    """Deterministic document-level split of a corpus (or plain id list)."""
    doc_ids = corpus.doc_ids() if isinstance(corpus, Corpus) else list(corpus)
    if len(set(doc_ids)) != len(doc_ids):
        raise DataError("document ids are not unique")
    if len(doc_ids) < 3:
        raise DataError(f"need at least 3 documents to split, got {len(doc_ids)}")
    n_train, n_dev, n_test = partition_sizes(len(doc_ids), ratios)
    shuffled = _lcg_shuffle(sorted(doc_ids), seed)
    partitions = {
        "train": sorted(shuffled[:n_train]),
        "dev": sorted(shuffled[n_train:n_train + n_dev]),
        "test": sorted(shuffled[n_train + n_dev:]),
    }
    return SplitManifest(seed=seed, ratios=tuple(float(r) for r in ratios), partitions=partitions)


def apply_split(corpus: Corpus, manifest: SplitManifest) -> dict[str, Corpus]:
    """Partition a corpus by a manifest covering exactly its documents."""
    corpus_ids = set(corpus.doc_ids())
    manifest_ids: set[str] = set()
    for docs in manifest.partitions.values():
        manifest_ids.update(docs)
    missing = sorted(corpus_ids - manifest_ids)
    extra = sorted(manifest_ids - corpus_ids)
    if missing or extra:
        raise DataError(
            f"manifest does not cover the corpus (missing={missing}, extra={extra})"
        )
    membership = manifest.partition_of()
    grouped: dict[str, list[Document]] = {p: [] for p in manifest.partitions}
    for doc in corpus.documents:
        grouped[membership[doc.doc_id]].append(doc)
    return {p: Corpus(tuple(docs)) for p, docs in grouped.items()}


def write_manifest(path: str | Path, manifest: SplitManifest) -> None:
    doc = {
        "seed": manifest.seed,
        "ratios": list(manifest.ratios),
        "partitions": {p: manifest.partitions[p] for p in PARTITIONS if p in manifest.partitions},
    }
    atomic_write(path, json.dumps(doc, ensure_ascii=False, indent=2) + "\n")


def load_manifest(path: str | Path) -> SplitManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise FormatError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc.msg}") from exc
    try:
        partitions = {str(p): [str(d) for d in docs] for p, docs in doc["partitions"].items()}
        manifest = SplitManifest(
            seed=int(doc.get("seed", 0)),
            ratios=tuple(float(r) for r in doc.get("ratios", DEFAULT_RATIOS)),
            partitions=partitions,
        )
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise FormatError(f"{path}: bad manifest: {exc}") from exc
    seen: set[str] = set()
    for part, docs in manifest.partitions.items():
        if part not in PARTITIONS:
            raise FormatError(f"{path}: unknown partition {part!r}")
        for doc_id in docs:
            if doc_id in seen:
                raise FormatError(f"{path}: document {doc_id!r} appears in two partitions")
            seen.add(doc_id)
    return manifest


# ---------------------------------------------------------------------------
# Metaphor-flag markers
# ---------------------------------------------------------------------------

def mflag_scan(sentence: Sentence) -> list[tuple[int, str]]:
    """Positions of direct-metaphor marker words in a sentence.

    Purely diagnostic: markers flag nearby direct metaphor but are labeled
    negative themselves, so this never touches gold labels.
    """
    hits = []
    for pos, token in enumerate(sentence.tokens):
        if token.surface in PRE_SOURCE_MARKERS:
            hits.append((pos, "pre-source"))
        elif token.surface in POST_SOURCE_MARKERS:
            hits.append((pos, "post-source"))
    return hits
