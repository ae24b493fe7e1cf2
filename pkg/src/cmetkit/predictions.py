"""Decoding raw model outputs into per-token binary labels.

Three output families are supported, matching the prediction file's
``kind`` field:

* ``probs``: a per-token probability vector, thresholded at tau.
* ``generative``: free text from which the first well-formed JSON array
  is extracted; array items name metaphor tokens either by surface string
  or by 0-based index.  Text with no well-formed array is a parse failure
  and contributes all-negative labels (failures stay in the metric
  denominator and are reported separately as a rate).
* ``bio``: a B/I/O tag per token, collapsed to token-level binary labels.

Every decoder returns a label vector of exactly the gold sentence's
length, whatever the input looks like.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Corpus
from .errors import DataError, FormatError
from .jsonl import read_records, write_records

PREDICTION_KINDS = ("probs", "generative", "bio")
DEFAULT_TAU = 0.5


@dataclass(frozen=True)
class TokenLabels:
    sent_id: str
    labels: tuple[bool, ...]


@dataclass(frozen=True)
class ParseOutcome:
    status: str  # "ok" | "parse-failure"
    detail: str = ""

    @property
    def failed(self) -> bool:
        return self.status == "parse-failure"


def threshold_probs(probs: Sequence[float], tau: float = DEFAULT_TAU, sent_id: str = "") -> TokenLabels:
    """Label i is positive when probs[i] >= tau."""
    for p in probs:
        if not isinstance(p, (int, float)) or isinstance(p, bool) or not 0.0 <= p <= 1.0:
            raise ValueError(f"probability out of range: {p!r}")
    return TokenLabels(sent_id, tuple(p >= tau for p in probs))


def _first_json_array(text: str) -> list | None:
    decoder = json.JSONDecoder()
    start = text.find("[")
    while start != -1:
        try:
            value, _end = decoder.raw_decode(text, start)
        except (ValueError, RecursionError):
            value = None
        if isinstance(value, list):
            return value
        start = text.find("[", start + 1)
    return None


def parse_generative(
    raw: str | bytes, gold_tokens: Sequence[str], sent_id: str = ""
) -> tuple[TokenLabels, ParseOutcome]:
    """Decode generative output against the gold token sequence.

    String items bind to the first not-yet-matched occurrence of that
    surface, left to right; integer items are 0-based token indices.
    Unmatched surfaces, out-of-range indices, and items of any other type
    are ignored and tallied in the outcome detail.
    """
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8", errors="replace")
    labels = [False] * len(gold_tokens)

    items = _first_json_array(raw)
    if items is None:
        return (
            TokenLabels(sent_id, tuple(labels)),
            ParseOutcome("parse-failure", "no well-formed JSON array in output"),
        )

    unmatched = out_of_range = foreign = 0
    for item in items:
        if isinstance(item, bool):
            foreign += 1
        elif isinstance(item, int):
            if 0 <= item < len(labels):
                labels[item] = True
            else:
                out_of_range += 1
        elif isinstance(item, str):
            for pos, surface in enumerate(gold_tokens):
                if surface == item and not labels[pos]:
                    labels[pos] = True
                    break
            else:
                unmatched += 1
        else:
            foreign += 1
    notes = []
    if unmatched:
        notes.append(f"{unmatched} unmatched surfaces")
    if out_of_range:
        notes.append(f"{out_of_range} out-of-range indices")
    if foreign:
        notes.append(f"{foreign} non-string non-index items")
    return TokenLabels(sent_id, tuple(labels)), ParseOutcome("ok", ", ".join(notes))


def decode_bio(tags: Sequence[str], sent_id: str = "") -> tuple[TokenLabels, int]:
    """Collapse B/I/O tags to token labels; returns (labels, orphan count).

    B and I are both positive at token granularity.  An I with no B or I
    directly before it is promoted to B and counted as an anomaly.
    """
    labels = []
    orphans = 0
    previous = "O"
    for tag in tags:
        if tag not in ("B", "I", "O"):
            raise ValueError(f"unknown BIO tag: {tag!r}")
        if tag == "I" and previous == "O":
            orphans += 1
        labels.append(tag != "O")
        previous = tag
    return TokenLabels(sent_id, tuple(labels)), orphans


def failure_rate(outcomes: Iterable[ParseOutcome]) -> float:
    outcomes = list(outcomes)
    if not outcomes:
        raise ValueError("failure rate is undefined for an empty outcome list")
    return sum(o.failed for o in outcomes) / len(outcomes)


# ---------------------------------------------------------------------------
# Prediction file decoding
# ---------------------------------------------------------------------------

@dataclass
class DecodedPredictions:
    labels: list[TokenLabels]
    outcomes: list[ParseOutcome]
    bio_orphans: int

    @property
    def parse_failure_rate(self) -> float:
        return failure_rate(self.outcomes) if self.outcomes else 0.0


def decode_predictions(path: str | Path, corpus: Corpus, tau: float = DEFAULT_TAU) -> DecodedPredictions:
    """Decode a predictions file against its gold corpus.

    Every record must name a known sentence; length-bearing payloads must
    match the gold token count exactly.
    """
    sentences = {sent.sent_id: sent for _, sent in corpus.sentences()}
    source = str(path)
    decoded = DecodedPredictions([], [], 0)
    seen: set[str] = set()
    for lineno, rec in read_records(path):
        if not isinstance(rec, Mapping):
            raise FormatError(f"{source}:{lineno}: expected an object")
        sent_id = rec.get("sent_id")
        if isinstance(sent_id, int):
            sent_id = str(sent_id)
        if not isinstance(sent_id, str) or not sent_id:
            raise FormatError.at(source, lineno, "sent_id", "must be a non-empty string")
        if sent_id not in sentences:
            raise DataError(f"{source}:{lineno}: prediction for unknown sentence {sent_id!r}")
        if sent_id in seen:
            raise DataError(f"{source}:{lineno}: second prediction for sentence {sent_id!r}")
        seen.add(sent_id)
        kind = rec.get("kind")
        if kind not in PREDICTION_KINDS:
            raise FormatError.at(source, lineno, "kind", f"unknown value {kind!r}")
        payload = rec.get("payload")
        sentence = sentences[sent_id]
        n_tokens = len(sentence.tokens)
        try:
            if kind == "probs":
                if not isinstance(payload, Sequence) or isinstance(payload, str) or len(payload) != n_tokens:
                    raise ValueError(f"expected {n_tokens} probabilities")
                labels = threshold_probs(payload, tau, sent_id)
                outcome = ParseOutcome("ok")
            elif kind == "bio":
                if not isinstance(payload, Sequence) or isinstance(payload, str) or len(payload) != n_tokens:
                    raise ValueError(f"expected {n_tokens} tags")
                labels, orphans = decode_bio(payload, sent_id)
                decoded.bio_orphans += orphans
                outcome = ParseOutcome("ok")
            else:
                if not isinstance(payload, str):
                    raise ValueError("generative payload must be a string")
                gold_surfaces = [t.surface for t in sentence.tokens]
                labels, outcome = parse_generative(payload, gold_surfaces, sent_id)
        except ValueError as exc:
            raise DataError(f"{source}:{lineno}: sentence {sent_id!r}: {exc}") from exc
        decoded.labels.append(labels)
        decoded.outcomes.append(outcome)
    return decoded


def write_labels(path: str | Path, decoded: DecodedPredictions) -> None:
    write_records(
        path,
        (
            {
                "sent_id": labels.sent_id,
                "labels": [int(v) for v in labels.labels],
                "status": outcome.status,
                "detail": outcome.detail,
            }
            for labels, outcome in zip(decoded.labels, decoded.outcomes)
        ),
    )


def load_labels(path: str | Path) -> tuple[list[TokenLabels], list[ParseOutcome]]:
    labels: list[TokenLabels] = []
    outcomes: list[ParseOutcome] = []
    source = str(path)
    for lineno, rec in read_records(path):
        if not isinstance(rec, Mapping):
            raise FormatError(f"{source}:{lineno}: expected an object")
        try:
            sent_id = rec["sent_id"]
            values = rec["labels"]
            if not isinstance(values, Sequence) or isinstance(values, str):
                raise TypeError("labels must be an array")
            if any(v not in (0, 1) for v in values):
                raise ValueError("labels must be 0 or 1")
            labels.append(TokenLabels(str(sent_id), tuple(bool(v) for v in values)))
            outcomes.append(ParseOutcome(rec.get("status", "ok"), rec.get("detail", "")))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{source}:{lineno}: bad label record: {exc}") from exc
    return labels, outcomes
