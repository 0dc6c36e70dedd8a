"""Micro-averaged precision/recall/F1 over exact-match keys.

An entity matches on (start, end, type). A relation matches on its argument
spans plus the relation type ("boundary_re"), or additionally on the argument
entity types ("strict_re"). Arguments are ordered unless asked otherwise.
All divisions by zero score 0.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .model import AnnotationSet, EntityType, RelationType

logger = logging.getLogger(__name__)

RE_MODES = ("boundary_re", "strict_re")


@dataclass(slots=True)
class ScoreCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn) < 0:
            raise ValueError(f"negative counts: tp={self.tp} fp={self.fp} fn={self.fn}")

    def add(self, other: "ScoreCounts") -> None:
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def prf(self) -> tuple[float, float, float]:
        return (self.precision, self.recall, self.f1)


def _dedupe(keys: list, side: str, doc_id: str) -> set:
    unique = set(keys)
    if len(unique) < len(keys):
        dupes = [k for k, c in Counter(keys).items() if c > 1]
        logger.warning("%s: collapsed %d duplicate %s mentions: %s", doc_id, len(keys) - len(unique), side, dupes)
    return unique


def _count_sets(pred_keys: list, gold_keys: list, doc_id: str) -> tuple[set, set]:
    return _dedupe(pred_keys, "predicted", doc_id), _dedupe(gold_keys, "gold", doc_id)


def match_ner(pred: AnnotationSet, gold: AnnotationSet) -> tuple[ScoreCounts, dict[EntityType, ScoreCounts]]:
    """Exact span+type matching. Returns overall counts and a per-type map."""
    if pred.doc_id != gold.doc_id:
        raise ValueError(f"scoring {pred.doc_id!r} against gold for {gold.doc_id!r}")
    pred_set, gold_set = _count_sets(
        [(m.start, m.end, m.etype) for m in pred.entities],
        [(m.start, m.end, m.etype) for m in gold.entities],
        gold.doc_id,
    )
    per_type: dict[EntityType, ScoreCounts] = {}
    overall = ScoreCounts()
    for etype in EntityType:
        p = {k for k in pred_set if k[2] is etype}
        g = {k for k in gold_set if k[2] is etype}
        counts = ScoreCounts(tp=len(p & g), fp=len(p - g), fn=len(g - p))
        if p or g:
            per_type[etype] = counts
        overall.add(counts)
    return overall, per_type


def _relation_keys(aset: AnnotationSet, mode: str, ordered: bool) -> list:
    by_id = aset.by_id()
    keys = []
    for r in aset.relations:
        try:
            e1, e2 = by_id[r.arg1], by_id[r.arg2]
        except KeyError as missing:
            raise ValueError(f"{aset.doc_id}: relation {r.id} references missing entity {missing}") from None
        if mode == "strict_re":
            ends = ((e1.start, e1.end, e1.etype), (e2.start, e2.end, e2.etype))
        else:
            ends = ((e1.start, e1.end), (e2.start, e2.end))
        keys.append((r.rtype, ends if ordered else frozenset(ends)))
    return keys


def match_re(
    pred: AnnotationSet, gold: AnnotationSet, mode: str = "boundary_re", ordered: bool = True
) -> tuple[ScoreCounts, dict[RelationType, ScoreCounts]]:
    """Relation matching in the given mode. Returns overall and per-type counts."""
    if mode not in RE_MODES:
        raise ValueError(f"unknown RE mode {mode!r} (expected one of {RE_MODES})")
    if pred.doc_id != gold.doc_id:
        raise ValueError(f"scoring {pred.doc_id!r} against gold for {gold.doc_id!r}")
    pred_set, gold_set = _count_sets(
        _relation_keys(pred, mode, ordered), _relation_keys(gold, mode, ordered), gold.doc_id
    )
    per_type: dict[RelationType, ScoreCounts] = {}
    overall = ScoreCounts()
    for rtype in RelationType:
        p = {k for k in pred_set if k[0] is rtype}
        g = {k for k in gold_set if k[0] is rtype}
        counts = ScoreCounts(tp=len(p & g), fp=len(p - g), fn=len(g - p))
        if p or g:
            per_type[rtype] = counts
        overall.add(counts)
    return overall, per_type


@dataclass(frozen=True, slots=True)
class TypeScore:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int

    @classmethod
    def from_counts(cls, c: ScoreCounts) -> "TypeScore":
        return cls(c.precision, c.recall, c.f1, c.tp, c.fp, c.fn)

    def to_obj(self) -> dict:
        return {"p": self.precision, "r": self.recall, "f1": self.f1, "tp": self.tp, "fp": self.fp, "fn": self.fn}


@dataclass(frozen=True, slots=True)
class ScoreReport:
    mode: str
    overall: tuple[float, float, float]
    per_entity_type: Mapping[str, TypeScore] = field(default_factory=dict)
    per_relation_type: Mapping[str, TypeScore] = field(default_factory=dict)

    def to_obj(self) -> dict:
        per_type = {label: ts.to_obj() for label, ts in self.per_entity_type.items()}
        per_type.update({label: ts.to_obj() for label, ts in self.per_relation_type.items()})
        p, r, f1 = self.overall
        return {"mode": self.mode, "overall": {"p": p, "r": r, "f1": f1}, "per_type": per_type}


def aggregate(
    doc_counts: Iterable[tuple[ScoreCounts, Mapping]],
    mode: str = "boundary_re",
    task: str = "ner",
) -> ScoreReport:
    """Micro-aggregate per-document counts into one report. Summing counts and
    then scoring is associative, so per-document and corpus-level aggregation
    agree."""
    total = ScoreCounts()
    per_type_totals: dict = {}
    for overall, per_type in doc_counts:
        total.add(overall)
        for label, counts in per_type.items():
            per_type_totals.setdefault(label, ScoreCounts()).add(counts)
    typed = {
        str(label): TypeScore.from_counts(counts)
        for label, counts in sorted(per_type_totals.items(), key=lambda kv: str(kv[0]))
    }
    return ScoreReport(
        mode=mode,
        overall=total.prf(),
        per_entity_type=typed if task == "ner" else {},
        per_relation_type=typed if task == "re" else {},
    )


def score_pair(
    pred: AnnotationSet, gold: AnnotationSet, mode: str = "boundary_re", ordered: bool = True
) -> tuple[ScoreReport, ScoreReport]:
    """Score one prediction set against gold; returns (NER report, RE report)."""
    ner_report = aggregate([match_ner(pred, gold)], mode=mode, task="ner")
    re_report = aggregate([match_re(pred, gold, mode=mode, ordered=ordered)], mode=mode, task="re")
    return ner_report, re_report


@dataclass(frozen=True, slots=True)
class ComparisonRow:
    source: str
    task: str
    precision: float
    recall: float
    f1: float

    def to_obj(self) -> dict:
        return {"source": self.source, "task": self.task, "p": self.precision, "r": self.recall, "f1": self.f1}


def compare_sources(
    sets: Iterable[AnnotationSet], gold: AnnotationSet, task: str = "ner", mode: str = "boundary_re"
) -> list[ComparisonRow]:
    """One row per source against the same gold, sorted by F1 descending
    (ties by source name). Gold against itself scores 1.0 by construction."""
    rows = []
    for aset in sets:
        if task == "ner":
            overall, _ = match_ner(aset, gold)
        else:
            overall, _ = match_re(aset, gold, mode=mode)
        p, r, f1 = overall.prf()
        rows.append(ComparisonRow(aset.source, task, p, r, f1))
    rows.sort(key=lambda row: (-row.f1, row.source))
    return rows


def render_report(report: ScoreReport, title: str) -> str:
    """Fixed-width text table for terminal output."""
    lines = [f"{title} (mode={report.mode})"]
    header = f"{'type':<20} {'P':>8} {'R':>8} {'F1':>8} {'TP':>6} {'FP':>6} {'FN':>6}"
    lines.append(header)
    lines.append("-" * len(header))
    merged: dict[str, TypeScore] = {}
    merged.update(report.per_entity_type)
    merged.update(report.per_relation_type)
    for label in sorted(merged):
        ts = merged[label]
        lines.append(
            f"{label:<20} {ts.precision:>8.4f} {ts.recall:>8.4f} {ts.f1:>8.4f} {ts.tp:>6} {ts.fp:>6} {ts.fn:>6}"
        )
    p, r, f1 = report.overall
    lines.append(f"{'overall':<20} {p:>8.4f} {r:>8.4f} {f1:>8.4f}")
    return "\n".join(lines) + "\n"
