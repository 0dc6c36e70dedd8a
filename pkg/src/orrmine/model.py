"""Core data model: the annotation schema, documents, mentions, and validation.

Offsets throughout are Unicode code points into ``Document.text``, end-exclusive.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .segment import DEFAULT_ABBREVIATIONS, segment


class SchemaError(ValueError):
    """An entity or relation label outside the closed schema."""


class EntityType(str, enum.Enum):
    CATALYST = "catalyst"
    SUPPORT = "support"
    ADDITIVE = "additive"
    ELECTROLYTE = "electrolyte"
    PRECURSORS = "precursors"
    OTHER_MATERIAL = "other_material"
    MATERIAL_REFERENCE = "material_reference"
    PROPERTY = "property"
    STRUCTURE = "structure"
    PROCESS = "process"
    CONDITION = "condition"
    VALUE = "value"

    def __str__(self) -> str:  # keep serialized form canonical
        return self.value

    @classmethod
    def parse(cls, label: str) -> "EntityType":
        return _parse_label(cls, label, _ENTITY_ALIASES)


class RelationType(str, enum.Enum):
    EQUIVALENT = "equivalent"
    RELATED_TO = "related_to"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, label: str) -> "RelationType":
        return _parse_label(cls, label, _RELATION_ALIASES)


# Material-class types participate in clustering and material-material links.
MATERIAL_TYPES = frozenset(
    {
        EntityType.CATALYST,
        EntityType.SUPPORT,
        EntityType.ADDITIVE,
        EntityType.ELECTROLYTE,
        EntityType.PRECURSORS,
        EntityType.OTHER_MATERIAL,
        EntityType.MATERIAL_REFERENCE,
    }
)

# Attribute-class types pair with a *_value column in structured output.
ATTRIBUTE_TYPES = frozenset(
    {
        EntityType.PROPERTY,
        EntityType.STRUCTURE,
        EntityType.PROCESS,
        EntityType.CONDITION,
    }
)


def _normalize_label(label: str) -> str:
    out = label.strip().lower().replace(" ", "_").replace("-", "_")
    return out.rstrip(".")


# Display names and abbreviations seen in annotation configs map onto the
# canonical snake_case identifiers; everything else is rejected.
_ENTITY_ALIASES = {
    "cat": "catalyst",
    "supp": "support",
    "add": "additive",
    "elect": "electrolyte",
    "prec": "precursors",
    "other": "other_material",
    "mat": "material_reference",
    "prop": "property",
    "struct": "structure",
    "proc": "process",
    "cond": "condition",
    "val": "value",
}

_RELATION_ALIASES = {
    "equiv": "equivalent",
    "rel": "related_to",
}


def _parse_label(cls, label: str, aliases: Mapping[str, str]):
    key = _normalize_label(label)
    key = aliases.get(key, key)
    try:
        return cls(key)
    except ValueError:
        allowed = ", ".join(m.value for m in cls)
        raise SchemaError(f"unknown {cls.__name__} label {label!r} (allowed: {allowed})") from None


@dataclass(frozen=True, slots=True)
class Section:
    name: str
    start: int
    end: int


@dataclass(frozen=True, slots=True)
class Token:
    start: int
    end: int
    sentence: int


@dataclass(frozen=True, slots=True)
class Document:
    """An article's text with its sentence and token segmentation."""

    doc_id: str
    text: str
    sections: tuple[Section, ...]
    sentences: tuple[tuple[int, int], ...]
    tokens: tuple[Token, ...]

    @classmethod
    def from_text(
        cls,
        doc_id: str,
        text: str,
        sections: Iterable[Section] | None = None,
        abbreviations: tuple[str, ...] = DEFAULT_ABBREVIATIONS,
    ) -> "Document":
        sentences, raw_tokens = segment(text, abbreviations)
        if sections is None:
            sections = (Section("text", 0, len(text)),) if text else ()
        return cls(
            doc_id=doc_id,
            text=text,
            sections=tuple(sections),
            sentences=tuple(sentences),
            tokens=tuple(Token(*t) for t in raw_tokens),
        )

    def __post_init__(self) -> None:
        n = len(self.text)
        last = 0
        for start, end in self.sentences:
            if not (0 <= start < end <= n):
                raise ValueError(f"{self.doc_id}: sentence range ({start}, {end}) outside text")
            if start < last:
                raise ValueError(f"{self.doc_id}: sentence ranges overlap or are unordered")
            last = end
        for tok in self.tokens:
            s_start, s_end = self.sentences[tok.sentence]
            if not (s_start <= tok.start < tok.end <= s_end):
                raise ValueError(f"{self.doc_id}: token ({tok.start}, {tok.end}) escapes its sentence")

    def sentence_index_at(self, pos: int) -> int | None:
        """Index of the sentence whose range contains ``pos``, if any."""
        for i, (start, end) in enumerate(self.sentences):
            if start <= pos < end:
                return i
        return None

    def sentence_text(self, index: int) -> str:
        start, end = self.sentences[index]
        return self.text[start:end]


@dataclass(frozen=True, slots=True)
class EntityMention:
    id: str
    etype: EntityType
    start: int
    end: int
    surface: str
    meta: Mapping[str, float] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.start < 0 or self.end <= self.start:
            raise ValueError(f"mention {self.id}: bad span ({self.start}, {self.end})")

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True, slots=True)
class RelationMention:
    id: str
    rtype: RelationType
    arg1: str
    arg2: str
    meta: Mapping[str, float] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.arg1 == self.arg2:
            raise ValueError(f"relation {self.id}: arguments must differ (both {self.arg1})")


@dataclass(frozen=True, slots=True)
class AnnotationSet:
    """One source's mentions over one document.

    ``extras`` carries opaque standoff lines (attributes, notes) verbatim so
    they survive a parse/write cycle untouched.
    """

    source: str
    doc_id: str
    entities: tuple[EntityMention, ...]
    relations: tuple[RelationMention, ...] = ()
    extras: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "entities", tuple(self.entities))
        object.__setattr__(self, "relations", tuple(self.relations))
        object.__setattr__(self, "extras", tuple(self.extras))
        seen: set[str] = set()
        for m in self.entities:
            if m.id in seen:
                raise ValueError(f"{self.doc_id}: duplicate entity id {m.id}")
            seen.add(m.id)
        seen.clear()
        for r in self.relations:
            if r.id in seen:
                raise ValueError(f"{self.doc_id}: duplicate relation id {r.id}")
            seen.add(r.id)

    def by_id(self) -> dict[str, EntityMention]:
        return {m.id: m for m in self.entities}


@dataclass(frozen=True, slots=True)
class Finding:
    severity: str  # "error" | "warning" | "info"
    code: str
    message: str
    subject: str = ""


@dataclass(frozen=True, slots=True)
class ValidationReport:
    doc_id: str
    source: str
    findings: tuple[Finding, ...]

    @property
    def errors(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "error")

    @property
    def warnings(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "warning")

    @property
    def ok(self) -> bool:
        return not self.errors


def validate(aset: AnnotationSet, doc: Document) -> ValidationReport:
    """Check an annotation set against its document.

    Errors: span outside the text, surface/text disagreement, dangling
    relation arguments. Warnings: an ``equivalent`` relation with no
    material_reference endpoint. related_to type pairings are summarized as
    informational counts rather than enforced.
    """
    if aset.doc_id != doc.doc_id:
        raise ValueError(f"annotation set for {aset.doc_id!r} validated against document {doc.doc_id!r}")

    findings: list[Finding] = []
    n = len(doc.text)
    for m in aset.entities:
        if not (0 <= m.start < m.end <= n):
            findings.append(
                Finding("error", "span_out_of_range", f"span ({m.start}, {m.end}) outside text of length {n}", m.id)
            )
            continue
        actual = doc.text[m.start : m.end]
        if actual != m.surface:
            findings.append(
                Finding(
                    "error",
                    "surface_mismatch",
                    f"surface {m.surface!r} != text slice {actual!r} at ({m.start}, {m.end})",
                    m.id,
                )
            )

    by_id = aset.by_id()
    pair_counts: Counter[tuple[str, str]] = Counter()
    for r in aset.relations:
        dangling = [a for a in (r.arg1, r.arg2) if a not in by_id]
        if dangling:
            findings.append(
                Finding("error", "dangling_argument", f"arguments {dangling} missing from entity set", r.id)
            )
            continue
        e1, e2 = by_id[r.arg1], by_id[r.arg2]
        if r.rtype is RelationType.EQUIVALENT:
            if EntityType.MATERIAL_REFERENCE not in (e1.etype, e2.etype):
                findings.append(
                    Finding(
                        "warning",
                        "equivalent_without_reference",
                        f"equivalent between {e1.etype} and {e2.etype}; expected a material_reference endpoint",
                        r.id,
                    )
                )
        else:
            pair_counts[(e1.etype.value, e2.etype.value)] += 1

    for (t1, t2), count in sorted(pair_counts.items()):
        findings.append(Finding("info", "related_to_pair", f"related_to {t1}->{t2}: {count}"))

    return ValidationReport(doc_id=doc.doc_id, source=aset.source, findings=tuple(findings))
