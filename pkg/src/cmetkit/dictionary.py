"""Basic-meaning lexicon construction from a decoded dictionary dump.

The dump is a user-supplied UTF-8 JSONL file, one record per entry with
fields ``headword`` and ``gloss`` (the upstream binary decode is out of
scope, and gloss text is never redistributed).  This module parses the
dump, segments glosses into senses, picks each entry's basic meaning,
resolves cross-reference entries through a bounded chain walk, and
computes the lexicon statistics and corpus-coverage numbers.

Grammar conventions, fixed here because the source material does not pin
them down:

* Sense markers are the circled digits 1..50 (U+2460-U+2473, U+3251-U+325F,
  U+32B1-U+32BF), matched at any position in the gloss.  Text before the
  first marker is treated as entry preamble (pronunciation notes and the
  like) and belongs to no sense.  Markers out of order are re-sorted by
  their numeric value and the entry is flagged, never dropped.
* A sense is a cross-reference when it starts with one of the indicator
  words 见 (see), 同 (same as), 参看 (cf.) followed by a bracketed or
  quoted target span.  An indicator with a malformed target span flags the
  entry and yields no reference; an indicator with no target span at all
  is ordinary text (同 is also a common word).
* Duplicate headwords: the first occurrence wins, later ones are counted.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import DataError, FormatError
from .jsonl import read_records, write_records

logger = logging.getLogger(__name__)

MAX_RESOLUTION_DEPTH = 5

# Circled-digit sense markers, value 1..50.
_MARKER_RANGES = (
    (0x2460, 0x2473, 1),   # 1..20
    (0x3251, 0x325F, 21),  # 21..35
    (0x32B1, 0x32BF, 36),  # 36..50
)
MARKER_VALUES: dict[str, int] = {
    chr(cp): base + (cp - lo)
    for lo, hi, base in _MARKER_RANGES
    for cp in range(lo, hi + 1)
}
_MARKER_RE = re.compile("[" + "".join(MARKER_VALUES) + "]")

# Cross-reference indicators, each mapped to its canonical kind.
INDICATORS = {"见": "see", "同": "same-as", "参看": "cf"}
_TARGET_DELIMS = {
    "〖": "〗", "【": "】", "《": "》", "「": "」", "『": "』",
    "“": "”", "‘": "’", '"': '"', "'": "'",
}
_CROSS_REF_RE = re.compile(
    "^(?P<ind>" + "|".join(sorted(INDICATORS, key=len, reverse=True)) + ")"
    r"\s*(?P<open>[" + re.escape("".join(_TARGET_DELIMS)) + "])"
)


@dataclass(frozen=True)
class RawEntry:
    headword: str
    gloss: str


@dataclass(frozen=True)
class CrossRef:
    indicator: str  # "see" | "same-as" | "cf"
    target: str


@dataclass(frozen=True)
class Sense:
    ordinal: int
    text: str
    cross_ref: CrossRef | None = None


@dataclass
class ParsedEntry:
    """One dump entry after sense segmentation and reference detection."""

    headword: str
    gloss: str
    senses: list[Sense]
    marker_anomalous: bool = False
    ref_anomalous: bool = False


@dataclass
class ParseReport:
    accepted: int = 0
    skipped: int = 0
    duplicates: int = 0


@dataclass
class EntryTable:
    entries: dict[str, ParsedEntry]
    report: ParseReport


@dataclass(frozen=True)
class Resolution:
    """Outcome of the cross-reference walk for one entry.

    ``status`` is one of none-needed, resolved, failed-missing-target,
    failed-cycle, failed-depth; ``depth`` is the number of reference edges
    followed and is only meaningful for resolved entries.
    """

    status: str
    depth: int = 0

    def __str__(self) -> str:
        if self.status == "resolved":
            return f"resolved({self.depth})"
        return self.status

    @classmethod
    def parse(cls, text: str) -> "Resolution":
        m = re.fullmatch(r"resolved\((\d+)\)", text)
        if m:
            return cls("resolved", int(m.group(1)))
        if text in ("none-needed", "failed-missing-target", "failed-cycle", "failed-depth"):
            return cls(text)
        raise ValueError(f"not a resolution value: {text!r}")


@dataclass
class ResolvedEntry:
    headword: str
    senses: list[Sense]
    sense_count: int
    basic_meaning: str
    meaning_source: str  # "first-sense" | "headword-fallback" | "resolved-reference"
    resolution: Resolution


@dataclass
class ResolutionReport:
    referencing: int = 0
    resolved: int = 0
    missing_target: int = 0
    cycles: int = 0
    depth_exceeded: int = 0


@dataclass
class ResolvedTable:
    entries: dict[str, ResolvedEntry]


@dataclass
class DictStats:
    total_entries: int
    parseable_fraction: float
    polysemy_histogram: dict[int, int]
    multi_sense_fraction: float
    mean_senses: float
    max_senses: int
    referencing_entries: int
    resolved_count: int
    missing_target_count: int
    cycle_count: int


@dataclass
class CoverageReport:
    vocab_size: int
    covered: int
    coverage_fraction: float
    uncovered_tokens: list[str]


# ---------------------------------------------------------------------------
# Sense segmentation and cross-reference detection
# ---------------------------------------------------------------------------

def scan_cross_ref(sense_text: str) -> tuple[CrossRef | None, bool]:
    """Detect a cross-reference at the head of a sense.

    Returns ``(ref, anomalous)``.  ``anomalous`` is set when an indicator
    plus opening delimiter is present but the target span is unterminated
    or empty.
    """
    text = sense_text.strip()
    m = _CROSS_REF_RE.match(text)
    if m is None:
        return None, False
    closer = _TARGET_DELIMS[m.group("open")]
    end = text.find(closer, m.end())
    if end < 0:
        return None, True
    target = text[m.end():end].strip()
    if not target:
        return None, True
    return CrossRef(INDICATORS[m.group("ind")], target), False


def detect_cross_ref(sense_text: str) -> CrossRef | None:
    """Cross-reference of a sense, or None when it is ordinary text."""
    return scan_cross_ref(sense_text)[0]


def segment_gloss(gloss: str) -> tuple[list[Sense], bool]:
    """Split a gloss into senses at circled-digit markers.

    Returns ``(senses, marker_anomalous)``.  A gloss with no markers is a
    single sense with ordinal 1; an empty gloss yields no senses.  Marker
    values that are not strictly increasing re-sort the senses by value
    and set the anomaly flag.
    """
    gloss = gloss.strip()
    if not gloss:
        return [], False

    hits = list(_MARKER_RE.finditer(gloss))
    if not hits:
        ref, anomalous = scan_cross_ref(gloss)
        return [Sense(1, gloss, ref)], anomalous

    pieces: list[tuple[int, str]] = []
    for i, hit in enumerate(hits):
        start = hit.end()
        end = hits[i + 1].start() if i + 1 < len(hits) else len(gloss)
        text = gloss[start:end].strip()
        if text:
            pieces.append((MARKER_VALUES[hit.group()], text))

    ordered = sorted(pieces, key=lambda p: p[0])
    anomalous = ordered != pieces or len({v for v, _ in pieces}) != len(pieces)

    senses = []
    for value, text in ordered:
        ref, ref_bad = scan_cross_ref(text)
        anomalous = anomalous or ref_bad
        senses.append(Sense(value, text, ref))
    return senses, anomalous


def split_senses(gloss: str) -> list[Sense]:
    """Senses of a gloss, ordered by marker value."""
    return segment_gloss(gloss)[0]


def select_basic_meaning(entry: ParsedEntry | ResolvedEntry) -> tuple[str, str]:
    """Basic meaning of an entry: first sense text, or headword fallback."""
    if entry.senses:
        return entry.senses[0].text, "first-sense"
    return entry.headword, "headword-fallback"


# ---------------------------------------------------------------------------
# Dump parsing
# ---------------------------------------------------------------------------

def _coerce_record(record: object) -> RawEntry | None:
    if not isinstance(record, Mapping):
        return None
    headword = record.get("headword")
    gloss = record.get("gloss", "")
    if not isinstance(headword, str) or not headword.strip():
        return None
    if not isinstance(gloss, str):
        return None
    return RawEntry(headword.strip(), gloss)


def parse_dump(records: Iterable[object]) -> EntryTable:
    """Build the headword-keyed entry table from decoded dump records.

    Malformed records are skipped and counted, never fatal; duplicate
    headwords keep the first occurrence.
    """
    entries: dict[str, ParsedEntry] = {}
    report = ParseReport()
    for record in records:
        raw = _coerce_record(record)
        if raw is None:
            report.skipped += 1
            continue
        if raw.headword in entries:
            report.duplicates += 1
            continue
        report.accepted += 1
        senses, marker_anomalous = segment_gloss(raw.gloss)
        ref_anomalous = False
        # A reference pointing at its own headword would be a trivial cycle;
        # drop it at parse time and flag the entry instead.
        cleaned = []
        for sense in senses:
            if sense.cross_ref is not None and sense.cross_ref.target == raw.headword:
                ref_anomalous = True
                sense = replace(sense, cross_ref=None)
            cleaned.append(sense)
        entries[raw.headword] = ParsedEntry(
            headword=raw.headword,
            gloss=raw.gloss,
            senses=cleaned,
            marker_anomalous=marker_anomalous,
            ref_anomalous=ref_anomalous,
        )
    if report.accepted == 0:
        logger.warning("dump stream produced no entries")
    if report.skipped:
        logger.warning("skipped %d malformed dump records", report.skipped)
    if report.duplicates:
        logger.info("ignored %d duplicate headwords (first occurrence wins)", report.duplicates)
    return EntryTable(entries=entries, report=report)


def load_dump(path: str | Path) -> EntryTable:
    """Parse a dump file, mapping JSON-level breakage to skip-and-count."""

    def stream() -> Iterator[object]:
        for _lineno, obj in read_records(path):
            yield obj

    return parse_dump(stream())


# ---------------------------------------------------------------------------
# Cross-reference resolution
# ---------------------------------------------------------------------------

def _first_sense_ref(entry: ParsedEntry | ResolvedEntry) -> CrossRef | None:
    return entry.senses[0].cross_ref if entry.senses else None


def resolve_references(table: EntryTable | ResolvedTable) -> tuple[ResolvedTable, ResolutionReport]:
    """Resolve every referencing entry by walking its reference chain.

    A chain is followed for at most ``MAX_RESOLUTION_DEPTH`` edges; walks
    that revisit an entry fail as cycles, walks leaving the table fail as
    missing targets.  Resolution is a pure per-entry function of the
    table, so re-resolving an already-resolved table is a no-op.
    """
    entries = table.entries
    resolved: dict[str, ResolvedEntry] = {}
    report = ResolutionReport()

    for headword in sorted(entries):
        entry = entries[headword]
        own_meaning, own_source = select_basic_meaning(entry)
        ref = _first_sense_ref(entry)
        if ref is None:
            resolution = Resolution("none-needed")
            meaning, source = own_meaning, own_source
        else:
            report.referencing += 1
            resolution, meaning = _walk_chain(entries, headword, ref)
            if resolution.status == "resolved":
                report.resolved += 1
                source = "resolved-reference"
            else:
                # Failed walks keep the entry's own referencing text so the
                # basic meaning stays non-empty.
                meaning, source = own_meaning, own_source
                if resolution.status == "failed-missing-target":
                    report.missing_target += 1
                elif resolution.status == "failed-cycle":
                    report.cycles += 1
                else:
                    report.depth_exceeded += 1
        resolved[headword] = ResolvedEntry(
            headword=headword,
            senses=list(entry.senses),
            sense_count=len(entry.senses),
            basic_meaning=meaning,
            meaning_source=source,
            resolution=resolution,
        )
    return ResolvedTable(entries=resolved), report


def _walk_chain(
    entries: Mapping[str, ParsedEntry | ResolvedEntry], start: str, ref: CrossRef
) -> tuple[Resolution, str]:
    visited = {start}
    depth = 0
    while True:
        if depth + 1 > MAX_RESOLUTION_DEPTH:
            return Resolution("failed-depth"), ""
        target = ref.target
        if target not in entries:
            return Resolution("failed-missing-target"), ""
        if target in visited:
            return Resolution("failed-cycle"), ""
        visited.add(target)
        depth += 1
        entry = entries[target]
        next_ref = _first_sense_ref(entry)
        if next_ref is None:
            meaning, _source = select_basic_meaning(entry)
            return Resolution("resolved", depth), meaning
        ref = next_ref


# ---------------------------------------------------------------------------
# Statistics and coverage
# ---------------------------------------------------------------------------

def compute_dict_stats(resolved: ResolvedTable) -> DictStats:
    """Lexicon statistics over a resolved table (zeros for an empty table)."""
    entries = resolved.entries
    total = len(entries)
    histogram: dict[int, int] = {}
    fallback = 0
    referencing = resolved_count = missing = cycles = 0
    total_senses = 0
    for entry in entries.values():
        histogram[entry.sense_count] = histogram.get(entry.sense_count, 0) + 1
        total_senses += entry.sense_count
        if entry.meaning_source == "headword-fallback":
            fallback += 1
        status = entry.resolution.status
        if status != "none-needed":
            referencing += 1
        if status == "resolved":
            resolved_count += 1
        elif status == "failed-missing-target":
            missing += 1
        elif status == "failed-cycle":
            cycles += 1
    multi = sum(n for count, n in histogram.items() if count >= 2)
    return DictStats(
        total_entries=total,
        parseable_fraction=(total - fallback) / total if total else 0.0,
        polysemy_histogram=dict(sorted(histogram.items())),
        multi_sense_fraction=multi / total if total else 0.0,
        mean_senses=total_senses / total if total else 0.0,
        max_senses=max(histogram) if histogram else 0,
        referencing_entries=referencing,
        resolved_count=resolved_count,
        missing_target_count=missing,
        cycle_count=cycles,
    )


def compute_coverage(resolved: ResolvedTable, vocab: Iterable[str]) -> CoverageReport:
    """Exact headword coverage of a corpus vocabulary.

    ``vocab`` is the set of unique token surfaces; an empty vocabulary is
    an error since the fraction would be undefined.
    """
    vocab_set = set(vocab)
    if not vocab_set:
        raise DataError("coverage is undefined for an empty vocabulary")
    headwords = resolved.entries.keys()
    uncovered = sorted(token for token in vocab_set if token not in headwords)
    covered = len(vocab_set) - len(uncovered)
    return CoverageReport(
        vocab_size=len(vocab_set),
        covered=covered,
        coverage_fraction=covered / len(vocab_set),
        uncovered_tokens=uncovered,
    )


# ---------------------------------------------------------------------------
# Resolved-table serialization
# ---------------------------------------------------------------------------

def write_resolved(path: str | Path, resolved: ResolvedTable) -> None:
    """Write the resolved table as JSONL, one entry per line, headword-sorted."""
    write_records(
        path,
        (
            {
                "headword": e.headword,
                "basic_meaning": e.basic_meaning,
                "meaning_source": e.meaning_source,
                "resolution": str(e.resolution),
                "sense_count": e.sense_count,
            }
            for e in resolved.entries.values()
        ),
    )


def load_resolved(path: str | Path) -> ResolvedTable:
    """Load a resolved table written by :func:`write_resolved`.

    Sense texts are not serialized, so loaded entries carry the recorded
    sense_count with an empty sense list.
    """
    entries: dict[str, ResolvedEntry] = {}
    for lineno, rec in read_records(path):
        if not isinstance(rec, Mapping):
            raise FormatError(f"{path}:{lineno}: expected an object")
        try:
            headword = rec["headword"]
            entry = ResolvedEntry(
                headword=headword,
                senses=[],
                sense_count=int(rec["sense_count"]),
                basic_meaning=rec["basic_meaning"],
                meaning_source=rec["meaning_source"],
                resolution=Resolution.parse(rec["resolution"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}:{lineno}: bad resolved entry: {exc}") from exc
        if headword in entries:
            raise FormatError.at(str(path), lineno, "headword", f"duplicate {headword!r}")
        entries[headword] = entry
    return ResolvedTable(entries=dict(sorted(entries.items())))


def dict_stats_rows(stats: DictStats, report: ResolutionReport | None = None) -> list[tuple[str, str]]:
    """Human-readable stat rows (lexicon summary table shape)."""
    from .fmt import pct2, round_half_up

    h = stats.polysemy_histogram
    single = h.get(0, 0) + h.get(1, 0)
    two = h.get(2, 0)
    three_plus = sum(n for count, n in h.items() if count >= 3)
    rows = [
        ("Total entries", str(stats.total_entries)),
        ("Entries with basic meaning extracted", pct2(stats.parseable_fraction) + "%"),
        ("Polysemy: single-sense", str(single)),
        ("Polysemy: 2-sense", str(two)),
        ("Polysemy: 3+-sense", str(three_plus)),
        ("Multi-sense entries", pct2(stats.multi_sense_fraction) + "%"),
        ("Mean senses per entry", str(round_half_up(stats.mean_senses, 2))),
        ("Max senses (single entry)", str(stats.max_senses)),
        ("Referencing entries", str(stats.referencing_entries)),
        ("References resolved", str(stats.resolved_count)),
        ("References with missing target", str(stats.missing_target_count)),
        ("References in cycles", str(stats.cycle_count)),
    ]
    if report is not None:
        rows.append(("References over depth limit", str(report.depth_exceeded)))
    return rows
