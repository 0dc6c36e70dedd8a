"""Reading and writing the exchange JSONL format.

One JSON object per line: ``doc_key``, ``sentences`` (token strings per
sentence), and optional ``ner``/``relations`` lists parallel to the sentences.
Token indices are zero-based, inclusive at both ends, and count through the
whole entry (not per sentence). The label vocabulary is closed: twelve entity
labels and two relation labels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

ENTITY_LABELS: tuple[str, ...] = (
    "catalyst",
    "support",
    "additive",
    "electrolyte",
    "precursors",
    "other_material",
    "material_reference",
    "property",
    "structure",
    "process",
    "condition",
    "value",
)
RELATION_LABELS: tuple[str, ...] = ("equivalent", "related_to")

ENTITY_INDEX = {label: i for i, label in enumerate(ENTITY_LABELS)}
RELATION_INDEX = {label: i for i, label in enumerate(RELATION_LABELS)}

# The classifier heads reserve one extra class for "no mention"/"no relation".
NONE_ENTITY = len(ENTITY_LABELS)
NONE_RELATION = len(RELATION_LABELS)


@dataclass(frozen=True, slots=True)
class Segment:
    """One exchange entry, validated. ``raw`` keeps the original object so
    predictions can echo it unchanged."""

    doc_key: str
    sentences: tuple[tuple[str, ...], ...]
    ner: tuple[tuple[tuple[int, int, str], ...], ...]
    relations: tuple[tuple[tuple[int, int, int, int, str], ...], ...]
    raw: dict

    @property
    def n_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)

    def sentence_starts(self) -> list[int]:
        """First global token index of each sentence."""
        starts = [0]
        for sent in self.sentences[:-1]:
            starts.append(starts[-1] + len(sent))
        return starts


def _parse_segment(obj: dict, where: str) -> Segment:
    if "doc_key" not in obj or "sentences" not in obj:
        raise ValueError(f"{where}: entry needs 'doc_key' and 'sentences'")
    sentences = tuple(tuple(str(t) for t in s) for s in obj["sentences"])
    n_tokens = sum(len(s) for s in sentences)

    def check_span(start: int, end: int) -> None:
        if not 0 <= start <= end < n_tokens:
            raise ValueError(f"{where}: token span ({start}, {end}) out of range (0..{n_tokens - 1})")

    def check_label(label: str, vocab: dict) -> None:
        if label not in vocab:
            raise ValueError(f"{where}: unknown label {label!r}")

    ner_in = obj.get("ner", [[] for _ in sentences])
    rel_in = obj.get("relations", [[] for _ in sentences])
    if len(ner_in) != len(sentences) or len(rel_in) != len(sentences):
        raise ValueError(f"{where}: ner/relations lists not parallel to sentences")

    ner = []
    for sent in ner_in:
        row = []
        for entry in sent:
            start, end, label = int(entry[0]), int(entry[1]), str(entry[2])
            check_span(start, end)
            check_label(label, ENTITY_INDEX)
            row.append((start, end, label))
        ner.append(tuple(row))
    relations = []
    for sent in rel_in:
        row = []
        for entry in sent:
            s1, e1, s2, e2, label = (int(entry[0]), int(entry[1]), int(entry[2]), int(entry[3]), str(entry[4]))
            check_span(s1, e1)
            check_span(s2, e2)
            check_label(label, RELATION_INDEX)
            row.append((s1, e1, s2, e2, label))
        relations.append(tuple(row))

    return Segment(
        doc_key=str(obj["doc_key"]),
        sentences=sentences,
        ner=tuple(ner),
        relations=tuple(relations),
        raw=obj,
    )


def read_segments(path: str | Path) -> list[Segment]:
    """Load and validate one exchange JSONL file. Raises ``FileNotFoundError``
    for a missing file and ``ValueError`` naming the offending line for
    malformed content."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    segments = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        where = f"{path.name} line {line_no}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{where}: not JSON: {exc}") from None
        if not isinstance(obj, dict):
            raise ValueError(f"{where}: expected a JSON object")
        segments.append(_parse_segment(obj, where))
    return segments


def write_predictions(path: str | Path, entries: list[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(json.dumps(e, ensure_ascii=False) + "\n" for e in entries), encoding="utf-8")
    return path
