"""Structured output: material clusters, attribute rows, CSV, and DOT graphs.

``equivalent`` edges merge material-class mentions into clusters; each
cluster's ``related_to`` attributes become table rows (one row per attached
value), and material-material edges turn into cross-row line-id links. A
relation audit tracks where every input relation was consumed.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass
from importlib import resources

from .model import (
    ATTRIBUTE_TYPES,
    MATERIAL_TYPES,
    AnnotationSet,
    Document,
    EntityMention,
    EntityType,
    RelationType,
)

logger = logging.getLogger(__name__)

# Published column order; doc_id is appended as the final column.
CSV_COLUMNS = (
    "line#ID",
    "catalyst",
    "support",
    "additive",
    "electrolyte",
    "precursors",
    "other_material",
    "material_reference",
    "property",
    "property_value",
    "structure",
    "structure_value",
    "process",
    "process_value",
    "condition",
    "condition_value",
    "related_material's_line#ID",
    "doc_id",
)

_MATERIAL_FIELDS = {
    EntityType.CATALYST: "catalyst",
    EntityType.SUPPORT: "support",
    EntityType.ADDITIVE: "additive",
    EntityType.ELECTROLYTE: "electrolyte",
    EntityType.PRECURSORS: "precursors",
    EntityType.OTHER_MATERIAL: "other_material",
    EntityType.MATERIAL_REFERENCE: "material_reference",
}

_ATTRIBUTE_FIELDS = {
    EntityType.PROPERTY: ("property", "property_value"),
    EntityType.STRUCTURE: ("structure", "structure_value"),
    EntityType.PROCESS: ("process", "process_value"),
    EntityType.CONDITION: ("condition", "condition_value"),
}


@dataclass(frozen=True, slots=True)
class MaterialCluster:
    canonical_surface: str
    canonical_etype: EntityType
    members: tuple[str, ...]


@dataclass(slots=True)
class StructuredRow:
    line_id: int
    doc_id: str
    catalyst: str = ""
    support: str = ""
    additive: str = ""
    electrolyte: str = ""
    precursors: str = ""
    other_material: str = ""
    material_reference: str = ""
    property: str = ""
    property_value: str = ""
    structure: str = ""
    structure_value: str = ""
    process: str = ""
    process_value: str = ""
    condition: str = ""
    condition_value: str = ""
    related_material_line_ids: tuple[int, ...] = ()


@dataclass(frozen=True, slots=True)
class RelationAudit:
    """Where each relation went: cluster merges, attribute pairings (attribute,
    value, chain, and qualifier edges), material links, or nowhere."""

    merged: int = 0
    attribute_edges: int = 0
    value_edges: int = 0
    chain_edges: int = 0
    qualifier_edges: int = 0
    material_links: int = 0
    unconsumed: tuple[str, ...] = ()

    @property
    def consumed(self) -> int:
        return (
            self.merged
            + self.attribute_edges
            + self.value_edges
            + self.chain_edges
            + self.qualifier_edges
            + self.material_links
        )

    @property
    def total(self) -> int:
        return self.consumed + len(self.unconsumed)


class _DSU:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def merge_equivalents(aset: AnnotationSet) -> list[MaterialCluster]:
    """Cluster material-class mentions through ``equivalent`` edges. Every
    material mention lands in exactly one cluster; with no edges each is a
    singleton. Clusters come back ordered by earliest member offset."""
    by_id = aset.by_id()
    materials = [m for m in aset.entities if m.etype in MATERIAL_TYPES]
    dsu = _DSU([m.id for m in materials])
    for r in aset.relations:
        if r.rtype is not RelationType.EQUIVALENT:
            continue
        e1, e2 = by_id.get(r.arg1), by_id.get(r.arg2)
        if e1 is None or e2 is None:
            raise ValueError(f"{aset.doc_id}: relation {r.id} references a missing entity")
        if e1.etype in MATERIAL_TYPES and e2.etype in MATERIAL_TYPES:
            dsu.union(e1.id, e2.id)

    groups: dict[str, list[EntityMention]] = {}
    for m in materials:
        groups.setdefault(dsu.find(m.id), []).append(m)

    clusters = []
    for members in groups.values():
        members.sort(key=lambda m: (m.start, m.end))
        canonical = _canonical_member(members)
        clusters.append(
            MaterialCluster(
                canonical_surface=canonical.surface,
                canonical_etype=canonical.etype,
                members=tuple(m.id for m in members),
            )
        )
    clusters.sort(key=lambda c: min(by_id[mid].start for mid in c.members))
    return clusters


def _canonical_member(members: list[EntityMention]) -> EntityMention:
    # Longest surface wins, earliest offset breaks ties; references only count
    # when the whole cluster is references.
    named = [m for m in members if m.etype is not EntityType.MATERIAL_REFERENCE]
    pool = named or members
    return max(pool, key=lambda m: (len(m.surface), -m.start))


def _classify_relations(aset: AnnotationSet, cluster_of: dict[str, int]):
    """Bucket every relation by how structuring consumes it."""
    by_id = aset.by_id()
    merges: list = []
    attr_edges: list[tuple[int, EntityMention, int]] = []  # (cluster, attribute, order)
    value_edges: dict[str, list[EntityMention]] = {}
    chain: dict[str, list[EntityMention]] = {}  # value id -> chained condition/value mentions
    qualifiers: dict[str, list[EntityMention]] = {}  # attribute id -> condition mentions
    links: list[tuple[int, int]] = []
    unconsumed: list[str] = []

    for order, r in enumerate(aset.relations):
        e1, e2 = by_id.get(r.arg1), by_id.get(r.arg2)
        if e1 is None or e2 is None:
            raise ValueError(f"{aset.doc_id}: relation {r.id} references a missing entity")
        t1, t2 = e1.etype, e2.etype
        if r.rtype is RelationType.EQUIVALENT:
            if t1 in MATERIAL_TYPES and t2 in MATERIAL_TYPES:
                merges.append(r.id)
            else:
                unconsumed.append(r.id)
            continue

        # related_to; accept either argument order for pairing purposes
        if t1 in MATERIAL_TYPES and t2 in MATERIAL_TYPES:
            links.append((cluster_of[e1.id], cluster_of[e2.id]))
        elif t1 in MATERIAL_TYPES and t2 in ATTRIBUTE_TYPES:
            attr_edges.append((cluster_of[e1.id], e2, order))
        elif t2 in MATERIAL_TYPES and t1 in ATTRIBUTE_TYPES:
            attr_edges.append((cluster_of[e2.id], e1, order))
        elif t1 is EntityType.VALUE and t2 in (EntityType.CONDITION, EntityType.VALUE):
            # a value qualified by a condition (or by another value)
            chain.setdefault(e1.id, []).append(e2)
        elif t1 in ATTRIBUTE_TYPES and t2 is EntityType.VALUE:
            value_edges.setdefault(e1.id, []).append(e2)
        elif t2 in ATTRIBUTE_TYPES and t1 is EntityType.VALUE:
            value_edges.setdefault(e2.id, []).append(e1)
        elif t1 in ATTRIBUTE_TYPES and t2 is EntityType.CONDITION:
            qualifiers.setdefault(e1.id, []).append(e2)
        elif t2 in ATTRIBUTE_TYPES and t1 is EntityType.CONDITION:
            qualifiers.setdefault(e2.id, []).append(e1)
        else:
            unconsumed.append(r.id)

    return merges, attr_edges, value_edges, chain, qualifiers, links, unconsumed


def build_rows(aset: AnnotationSet, doc: Document, start_line: int = 1) -> list[StructuredRow]:
    rows, _ = _build(aset, doc, start_line)
    return rows


def audit_relations(aset: AnnotationSet, doc: Document) -> RelationAudit:
    _, audit = _build(aset, doc, 1)
    return audit


def _build(aset: AnnotationSet, doc: Document, start_line: int) -> tuple[list[StructuredRow], RelationAudit]:
    """Emit one row per (cluster, attribute, value) with deterministic order:
    clusters by first offset, attributes by mention offset, values by offset."""
    by_id = aset.by_id()
    clusters = merge_equivalents(aset)
    cluster_of: dict[str, int] = {}
    for idx, cluster in enumerate(clusters):
        for mid in cluster.members:
            cluster_of[mid] = idx

    merges, attr_edges, value_edges, chain, qualifier_of, links, unconsumed = _classify_relations(aset, cluster_of)
    n_value_edges = sum(len(v) for v in value_edges.values())
    n_chain = sum(len(v) for v in chain.values())
    n_qualifiers = sum(len(v) for v in qualifier_of.values())

    cluster_attrs: dict[int, list[tuple[EntityMention, int]]] = {i: [] for i in range(len(clusters))}
    for cluster_idx, attr, order in attr_edges:
        cluster_attrs[cluster_idx].append((attr, order))

    rows: list[StructuredRow] = []
    first_row_of_cluster: dict[int, int] = {}
    line = start_line
    for idx, cluster in enumerate(clusters):
        attrs = sorted(cluster_attrs[idx], key=lambda ao: (ao[0].start, ao[0].end, ao[1]))
        bundles: list[tuple[EntityMention, EntityMention | None]] = []
        for attr, _order in attrs:
            values = sorted(value_edges.get(attr.id, ()), key=lambda v: (v.start, v.end))
            if values:
                bundles.extend((attr, v) for v in values)
            else:
                bundles.append((attr, None))
        if not bundles:
            bundles = [(None, None)]

        for attr, value in bundles:
            row = StructuredRow(line_id=line, doc_id=aset.doc_id)
            setattr(row, _MATERIAL_FIELDS[cluster.canonical_etype], cluster.canonical_surface)
            if attr is not None:
                attr_col, value_col = _ATTRIBUTE_FIELDS[attr.etype]
                setattr(row, attr_col, attr.surface)
                if value is not None:
                    setattr(row, value_col, value.surface)
                    for hop in sorted(chain.get(value.id, ()), key=lambda m: (m.start, m.end)):
                        if hop.etype is EntityType.CONDITION and not row.condition:
                            row.condition = hop.surface
                        elif hop.etype is EntityType.VALUE and not row.condition_value:
                            row.condition_value = hop.surface
                for q in sorted(qualifier_of.get(attr.id, ()), key=lambda m: (m.start, m.end)):
                    if not row.condition:
                        row.condition = q.surface
            if idx not in first_row_of_cluster:
                first_row_of_cluster[idx] = line
            rows.append(row)
            line += 1

    link_pairs = set()
    for c1, c2 in links:
        link_pairs.add((c1, c2))
    related: dict[int, set[int]] = {}
    for c1, c2 in link_pairs:
        related.setdefault(c1, set()).add(first_row_of_cluster[c2])
        related.setdefault(c2, set()).add(first_row_of_cluster[c1])
    for idx, line_ids in related.items():
        first = first_row_of_cluster[idx]
        for row in rows:
            if row.line_id == first:
                row.related_material_line_ids = tuple(sorted(line_ids))

    if unconsumed:
        logger.info("%s: %d relations not consumed by structuring: %s", aset.doc_id, len(unconsumed), unconsumed)
    audit = RelationAudit(
        merged=len(merges),
        attribute_edges=len(attr_edges),
        value_edges=n_value_edges,
        chain_edges=n_chain,
        qualifier_edges=n_qualifiers,
        material_links=len(links),
        unconsumed=tuple(unconsumed),
    )
    return rows, audit


def write_csv(rows: list[StructuredRow]) -> bytes:
    """RFC-4180 CSV (UTF-8, CRLF, minimal quoting) with the published header
    plus doc_id. Multi-valued link ids join with ";"."""
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL)
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                row.line_id,
                row.catalyst,
                row.support,
                row.additive,
                row.electrolyte,
                row.precursors,
                row.other_material,
                row.material_reference,
                row.property,
                row.property_value,
                row.structure,
                row.structure_value,
                row.process,
                row.process_value,
                row.condition,
                row.condition_value,
                ";".join(str(i) for i in row.related_material_line_ids),
                row.doc_id,
            ]
        )
    return buf.getvalue().encode("utf-8")


def parse_csv(data: bytes) -> list[StructuredRow]:
    text = data.decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {header!r}")
    rows = []
    for rec in reader:
        if not rec:
            continue
        related = tuple(int(x) for x in rec[16].split(";") if x)
        row = StructuredRow(line_id=int(rec[0]), doc_id=rec[17], related_material_line_ids=related)
        for value, name in zip(rec[1:16], CSV_COLUMNS[1:16]):
            setattr(row, name, value)
        rows.append(row)
    return rows


def load_palette() -> dict[str, str]:
    data = resources.files("orrmine.data").joinpath("graph_palette.json").read_text(encoding="utf-8")
    return json.loads(data)


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def export_graph(aset: AnnotationSet, doc: Document, palette: dict[str, str] | None = None) -> str:
    """DOT digraph: one node per entity (surface + type, filled with the
    type's palette color), one labeled edge per relation. Node order follows
    text offsets; edge order follows the input."""
    if palette is None:
        palette = load_palette()
    default = palette.get("default", "#d9d9d9")
    lines = [f"digraph {_dot_quote_id(aset.doc_id)} {{", "  rankdir=LR;", '  node [shape=box, style=filled];']
    for m in sorted(aset.entities, key=lambda m: (m.start, m.end, m.id)):
        color = palette.get(m.etype.value, default)
        label = _dot_escape(m.surface) + r"\n" + m.etype.value
        lines.append(f'  "{_dot_escape(m.id)}" [label="{label}", fillcolor="{color}"];')
    for r in aset.relations:
        lines.append(f'  "{_dot_escape(r.arg1)}" -> "{_dot_escape(r.arg2)}" [label="{r.rtype.value}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_quote_id(name: str) -> str:
    return '"' + _dot_escape(name) + '"'
