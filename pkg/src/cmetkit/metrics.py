"""Token-level evaluation: confusion counts, class scores, seed averages.

The primary metric is positive-class F1; macro F1 is the unweighted mean
of the positive- and negative-class F1s and is reported alongside because
the heavy class imbalance makes it look inflated on its own.  All 0/0
ratios are defined as 0.  Cross-seed spreads use the population standard
deviation (divisor N, not N-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import Corpus
from .errors import DataError
from .predictions import TokenLabels


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )


@dataclass(frozen=True)
class ScoreSet:
    pos_precision: float
    pos_recall: float
    pos_f1: float
    neg_f1: float
    macro_f1: float


@dataclass(frozen=True)
class SeedAggregate:
    values: tuple[float, ...]
    mean: float
    std: float
    seeds: tuple[int, ...] = ()


def gold_labels(corpus: Corpus) -> list[TokenLabels]:
    """Gold label vectors for every sentence of a corpus, in corpus order."""
    return [
        TokenLabels(sent.sent_id, tuple(tok.metaphor for tok in sent.tokens))
        for _, sent in corpus.sentences()
    ]


def confusion(gold: Sequence[TokenLabels], pred: Sequence[TokenLabels]) -> ConfusionCounts:
    """Exact token-level counts over sentence-aligned label sets."""
    pred_by_id = {p.sent_id: p for p in pred}
    if len(pred_by_id) != len(pred):
        raise DataError("prediction labels contain duplicate sentence ids")
    gold_ids = {g.sent_id for g in gold}
    extra = set(pred_by_id) - gold_ids
    if extra:
        raise DataError(f"predictions for sentences not in gold: {sorted(extra)}")
    tp = fp = fn = tn = 0
    for g in gold:
        p = pred_by_id.get(g.sent_id)
        if p is None:
            raise DataError(f"no prediction for sentence {g.sent_id!r}")
        if len(p.labels) != len(g.labels):
            raise DataError(
                f"sentence {g.sent_id!r}: gold has {len(g.labels)} tokens, prediction has {len(p.labels)}"
            )
        for gv, pv in zip(g.labels, p.labels):
            if gv and pv:
                tp += 1
            elif not gv and pv:
                fp += 1
            elif gv and not pv:
                fn += 1
            else:
                tn += 1
    return ConfusionCounts(tp, fp, fn, tn)


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def score(counts: ConfusionCounts) -> ScoreSet:
    """Class scores from confusion counts; the negative class swaps roles."""
    pos_p, pos_r, pos_f1 = _prf(counts.tp, counts.fp, counts.fn)
    _, _, neg_f1 = _prf(counts.tn, counts.fn, counts.fp)
    return ScoreSet(
        pos_precision=pos_p,
        pos_recall=pos_r,
        pos_f1=pos_f1,
        neg_f1=neg_f1,
        macro_f1=(pos_f1 + neg_f1) / 2,
    )


def per_register(
    gold: Sequence[TokenLabels],
    pred: Sequence[TokenLabels],
    register_map: Mapping[str, str],
) -> dict[str, ScoreSet]:
    """Scores computed separately on each register's sentences."""
    unknown = [g.sent_id for g in gold if g.sent_id not in register_map]
    if unknown:
        raise DataError(f"sentences with no register: {unknown[:5]}")
    by_register: dict[str, list[TokenLabels]] = {}
    for g in gold:
        by_register.setdefault(register_map[g.sent_id], []).append(g)
    pred_by_id = {p.sent_id: p for p in pred}
    out = {}
    for register in sorted(by_register):
        subset = by_register[register]
        subset_pred = [pred_by_id[g.sent_id] for g in subset if g.sent_id in pred_by_id]
        out[register] = score(confusion(subset, subset_pred))
    return out


def register_confusions(
    gold: Sequence[TokenLabels],
    pred: Sequence[TokenLabels],
    register_map: Mapping[str, str],
) -> dict[str, ConfusionCounts]:
    by_register: dict[str, list[TokenLabels]] = {}
    for g in gold:
        by_register.setdefault(register_map[g.sent_id], []).append(g)
    pred_by_id = {p.sent_id: p for p in pred}
    return {
        register: confusion(subset, [pred_by_id[g.sent_id] for g in subset])
        for register, subset in sorted(by_register.items())
    }


def aggregate_seeds(values: Sequence[float], seeds: Sequence[int] = ()) -> SeedAggregate:
    """Mean and population std over per-seed values (Welford's recurrence)."""
    if not values:
        raise ValueError("cannot aggregate an empty value list")
    if seeds and len(seeds) != len(values):
        raise ValueError("seed list length does not match value list")
    mean = 0.0
    m2 = 0.0
    for k, x in enumerate(values, start=1):
        delta = x - mean
        mean += delta / k
        m2 += delta * (x - mean)
    std = math.sqrt(m2 / len(values))
    return SeedAggregate(
        values=tuple(float(v) for v in values),
        mean=mean,
        std=std,
        seeds=tuple(seeds),
    )
