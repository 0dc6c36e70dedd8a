"""Brat standoff reading and writing.

A corpus is a directory of ``<stem>.txt`` files, each optionally paired with
``<stem>.ann``. Only T (text-bound) and R (relation) lines carry schema
content here; any other line is kept verbatim and written back unchanged.
"""

from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import Iterator

from .model import (
    AnnotationSet,
    Document,
    EntityMention,
    EntityType,
    RelationMention,
    RelationType,
    SchemaError,
    validate,
)

logger = logging.getLogger(__name__)

_T_LINE = re.compile(r"^(T\S+)\t(\S+) ([^\t]+)\t(.*)$")
_R_LINE = re.compile(r"^(R\S+)\t(\S+) Arg1:(\S+) Arg2:(\S+)\s*$")


class BratParseError(ValueError):
    def __init__(self, line_no: int, line: str, reason: str):
        self.line_no = line_no
        self.line = line
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}: {line!r}")


def parse_ann(ann_text: str, doc: Document, source: str = "gold") -> AnnotationSet:
    """Parse standoff text into an AnnotationSet over ``doc``.

    Rejects discontinuous spans, offsets outside the text, surfaces that
    disagree with the text, unknown labels, and duplicate ids. Lines with any
    other prefix pass through opaquely (and are counted in the log).
    """
    entities: list[EntityMention] = []
    relations: list[RelationMention] = []
    extras: list[str] = []
    seen_t: set[str] = set()
    seen_r: set[str] = set()

    for line_no, line in enumerate(ann_text.split("\n"), start=1):
        if not line.strip():
            continue
        if line.startswith("T"):
            m = _T_LINE.match(line)
            if not m:
                raise BratParseError(line_no, line, "malformed text-bound line")
            tid, label, offsets, surface = m.groups()
            if ";" in offsets:
                raise BratParseError(line_no, line, "discontinuous spans are not supported")
            parts = offsets.split(" ")
            if len(parts) != 2 or not all(p.isdigit() for p in parts):
                raise BratParseError(line_no, line, f"malformed offsets {offsets!r}")
            start, end = int(parts[0]), int(parts[1])
            if tid in seen_t:
                raise BratParseError(line_no, line, f"duplicate id {tid}")
            seen_t.add(tid)
            try:
                etype = EntityType.parse(label)
            except SchemaError as exc:
                raise BratParseError(line_no, line, str(exc)) from None
            if not (0 <= start < end <= len(doc.text)):
                raise BratParseError(line_no, line, f"offsets ({start}, {end}) outside text of length {len(doc.text)}")
            actual = doc.text[start:end]
            if actual != surface:
                raise BratParseError(line_no, line, f"surface {surface!r} does not match text slice {actual!r}")
            entities.append(EntityMention(tid, etype, start, end, surface))
        elif line.startswith("R"):
            m = _R_LINE.match(line)
            if not m:
                raise BratParseError(line_no, line, "malformed relation line")
            rid, label, arg1, arg2 = m.groups()
            if rid in seen_r:
                raise BratParseError(line_no, line, f"duplicate id {rid}")
            seen_r.add(rid)
            try:
                rtype = RelationType.parse(label)
            except SchemaError as exc:
                raise BratParseError(line_no, line, str(exc)) from None
            relations.append(RelationMention(rid, rtype, arg1, arg2))
        else:
            extras.append(line)

    if extras:
        logger.info("%s: %d non-T/R standoff lines passed through", doc.doc_id, len(extras))
    return AnnotationSet(source=source, doc_id=doc.doc_id, entities=entities, relations=relations, extras=tuple(extras))


def write_ann(aset: AnnotationSet, doc: Document | None = None) -> str:
    """Serialize to standoff text: T lines in ascending start order, then R
    lines in input order, ids renumbered densely; pass-through lines last.

    Deterministic byte-for-byte for a given set. With ``doc`` supplied the set
    must validate cleanly first; without it, relation arguments still have to
    resolve.
    """
    if doc is not None:
        report = validate(aset, doc)
        if not report.ok:
            msgs = "; ".join(f"{f.subject}: {f.message}" for f in report.errors)
            raise ValueError(f"{aset.doc_id}: refusing to write an invalid set ({msgs})")
    else:
        known = {m.id for m in aset.entities}
        for r in aset.relations:
            missing = [a for a in (r.arg1, r.arg2) if a not in known]
            if missing:
                raise ValueError(f"{aset.doc_id}: relation {r.id} references missing entities {missing}")

    order = sorted(
        range(len(aset.entities)),
        key=lambda i: (aset.entities[i].start, aset.entities[i].end, aset.entities[i].etype.value, i),
    )
    new_id = {aset.entities[i].id: f"T{rank + 1}" for rank, i in enumerate(order)}

    lines: list[str] = []
    for i in order:
        m = aset.entities[i]
        lines.append(f"{new_id[m.id]}\t{m.etype.value} {m.start} {m.end}\t{m.surface}")
    for k, r in enumerate(aset.relations, start=1):
        lines.append(f"R{k}\t{r.rtype.value} Arg1:{new_id[r.arg1]} Arg2:{new_id[r.arg2]}")
    lines.extend(aset.extras)
    return "".join(line + "\n" for line in lines)


def read_pair(txt_path: str | Path, ann_path: str | Path | None = None, source: str = "gold") -> tuple[Document, AnnotationSet]:
    """Load a ``.txt`` document and its standoff file (defaults to the paired
    ``.ann``; a missing annotation file yields an empty set)."""
    txt_path = Path(txt_path)
    text = txt_path.read_text(encoding="utf-8")
    doc = Document.from_text(txt_path.stem, text)
    if ann_path is None:
        ann_path = txt_path.with_suffix(".ann")
    ann_path = Path(ann_path)
    if ann_path.exists():
        aset = parse_ann(ann_path.read_text(encoding="utf-8"), doc, source=source)
    else:
        aset = AnnotationSet(source=source, doc_id=doc.doc_id, entities=(), relations=())
    return doc, aset


def walk_pairs(directory: str | Path, source: str = "gold") -> Iterator[tuple[Document, AnnotationSet]]:
    """Yield (document, annotations) for every ``.txt`` in a directory, in
    stem order."""
    directory = Path(directory)
    for txt_path in sorted(directory.glob("*.txt")):
        yield read_pair(txt_path, source=source)
