"""Integration between standoff annotations and the model exchange format.

The exchange format is JSONL: one document per line with ``doc_key``,
``dataset``, ``sentences`` (token strings per sentence), ``ner`` and
``relations`` (token-index spans per sentence). Token indices are zero-based,
document-global, and end-inclusive. Predictions reuse the shape under
``predicted_ner``/``predicted_relations`` with optional trailing confidence
floats per entry.
"""

from __future__ import annotations

import json
import logging
import random
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import (
    AnnotationSet,
    Document,
    EntityMention,
    EntityType,
    RelationMention,
    RelationType,
)

logger = logging.getLogger(__name__)

_CONFIDENCE_KEYS = ("logit", "softmax")


class AlignmentError(ValueError):
    """A mention span that cannot be expressed on token boundaries."""


@dataclass(frozen=True, slots=True)
class SplitConfig:
    max_tokens: int = 300
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 42

    def __post_init__(self) -> None:
        if self.max_tokens < 1:
            raise ValueError(f"max_tokens must be positive, got {self.max_tokens}")
        if len(self.ratios) != 3 or any(r < 0 for r in self.ratios):
            raise ValueError(f"ratios must be three non-negative numbers, got {self.ratios!r}")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError(f"ratios must sum to 1, got {self.ratios!r}")


@dataclass(frozen=True, slots=True)
class ModelDoc:
    doc_key: str
    dataset: str
    sentences: tuple[tuple[str, ...], ...]
    ner: tuple[tuple[tuple[int, int, str], ...], ...]
    relations: tuple[tuple[tuple[int, int, int, int, str], ...], ...]

    def n_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)

    def to_obj(self) -> dict:
        return {
            "doc_key": self.doc_key,
            "dataset": self.dataset,
            "sentences": [list(s) for s in self.sentences],
            "ner": [[list(e) for e in sent] for sent in self.ner],
            "relations": [[list(r) for r in sent] for sent in self.relations],
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "ModelDoc":
        sentences = tuple(tuple(str(t) for t in s) for s in obj["sentences"])
        ner = tuple(
            tuple((int(e[0]), int(e[1]), str(e[2])) for e in sent) for sent in obj.get("ner", [[]] * len(sentences))
        )
        relations = tuple(
            tuple((int(r[0]), int(r[1]), int(r[2]), int(r[3]), str(r[4])) for r in sent)
            for sent in obj.get("relations", [[]] * len(sentences))
        )
        if len(ner) != len(sentences) or len(relations) != len(sentences):
            raise ValueError(f"{obj.get('doc_key')}: ner/relations lists not parallel to sentences")
        return cls(
            doc_key=str(obj["doc_key"]),
            dataset=str(obj.get("dataset", "orr")),
            sentences=sentences,
            ner=ner,
            relations=relations,
        )


def dumps_jsonl(mdocs: Iterable[ModelDoc]) -> str:
    return "".join(json.dumps(m.to_obj(), ensure_ascii=False) + "\n" for m in mdocs)


def loads_jsonl(text: str) -> list[ModelDoc]:
    return [ModelDoc.from_obj(json.loads(line)) for line in text.splitlines() if line.strip()]


def filter_relations(
    aset: AnnotationSet, doc: Document
) -> tuple[AnnotationSet, tuple[RelationMention, ...]]:
    """Drop relations whose arguments sit in different sentences.

    Returns the filtered set and the dropped relations; entities are kept
    untouched, and nothing else changes.
    """
    by_id = aset.by_id()
    sent_of: dict[str, int | None] = {m.id: doc.sentence_index_at(m.start) for m in aset.entities}
    kept: list[RelationMention] = []
    dropped: list[RelationMention] = []
    for r in aset.relations:
        for a in (r.arg1, r.arg2):
            if a not in by_id:
                raise ValueError(f"{aset.doc_id}: relation {r.id} references missing entity {a}")
        if sent_of[r.arg1] == sent_of[r.arg2]:
            kept.append(r)
        else:
            dropped.append(r)
    filtered = AnnotationSet(
        source=aset.source,
        doc_id=aset.doc_id,
        entities=aset.entities,
        relations=tuple(kept),
        extras=aset.extras,
    )
    return filtered, tuple(dropped)


def _align(doc: Document, m: EntityMention, strict: bool) -> tuple[int, int]:
    """Map a character span onto (first, last) token indices, inclusive."""
    starts = [t.start for t in doc.tokens]
    ends = [t.end for t in doc.tokens]
    n = len(doc.tokens)
    first = bisect_right(starts, m.start) - 1
    if first < 0:
        first = 0
    if first < n and doc.tokens[first].end <= m.start:
        first += 1
    last = bisect_left(ends, m.end)
    if last >= n:
        last = n - 1
    if last >= 0 and doc.tokens[last].start >= m.end:
        last -= 1
    if first >= n or last < 0 or last < first:
        raise AlignmentError(f"{doc.doc_id}: mention {m.id} ({m.start}, {m.end}) covers no token")
    snapped = doc.tokens[first].start != m.start or doc.tokens[last].end != m.end
    if snapped:
        widened = doc.text[doc.tokens[first].start : doc.tokens[last].end]
        if strict:
            raise AlignmentError(
                f"{doc.doc_id}: mention {m.id} {m.surface!r} is not token-aligned (nearest tokens give {widened!r})"
            )
        logger.warning("%s: snapped mention %s %r outward to %r", doc.doc_id, m.id, m.surface, widened)
    if doc.tokens[first].sentence != doc.tokens[last].sentence:
        raise AlignmentError(f"{doc.doc_id}: mention {m.id} {m.surface!r} crosses a sentence boundary")
    return first, last


def to_model_doc(doc: Document, aset: AnnotationSet, dataset: str = "orr", strict: bool = False) -> ModelDoc:
    """Convert one document and its (already sentence-filtered) annotations.

    Character spans off token boundaries snap outward to the covering tokens
    with a warning; ``strict=True`` raises instead. Entity count is preserved
    exactly.
    """
    token_span: dict[str, tuple[int, int]] = {}
    token_sentence: dict[str, int] = {}
    ner: list[list[tuple[int, int, str]]] = [[] for _ in doc.sentences]
    for m in sorted(aset.entities, key=lambda m: (m.start, m.end, m.etype.value, m.id)):
        first, last = _align(doc, m, strict)
        token_span[m.id] = (first, last)
        sent = doc.tokens[first].sentence
        token_sentence[m.id] = sent
        ner[sent].append((first, last, m.etype.value))

    relations: list[list[tuple[int, int, int, int, str]]] = [[] for _ in doc.sentences]
    for r in aset.relations:
        if r.arg1 not in token_span or r.arg2 not in token_span:
            raise ValueError(f"{doc.doc_id}: relation {r.id} references missing entity")
        s1 = token_sentence[r.arg1]
        s2 = token_sentence[r.arg2]
        if s1 != s2:
            raise ValueError(
                f"{doc.doc_id}: relation {r.id} crosses sentences {s1} and {s2}; run filter_relations first"
            )
        a1, a2 = token_span[r.arg1], token_span[r.arg2]
        relations[s1].append((a1[0], a1[1], a2[0], a2[1], r.rtype.value))

    sentences = []
    for i, (_s, _e) in enumerate(doc.sentences):
        sentences.append(tuple(doc.text[t.start : t.end] for t in doc.tokens if t.sentence == i))
    return ModelDoc(
        doc_key=doc.doc_id,
        dataset=dataset,
        sentences=tuple(sentences),
        ner=tuple(tuple(sent) for sent in ner),
        relations=tuple(tuple(sent) for sent in relations),
    )


def split_document(mdoc: ModelDoc, cfg: SplitConfig) -> list[ModelDoc]:
    """Greedily pack consecutive whole sentences into segments of at most
    ``max_tokens`` tokens. A document that already fits comes back unchanged;
    otherwise segments are keyed ``<doc_key>#<k>`` with indices re-based."""
    lens = [len(s) for s in mdoc.sentences]
    for i, n in enumerate(lens):
        if n > cfg.max_tokens:
            raise ValueError(f"{mdoc.doc_key}: sentence {i} has {n} tokens, over the {cfg.max_tokens}-token limit")

    groups: list[tuple[int, int]] = []  # sentence index ranges, end-exclusive
    lo = 0
    count = 0
    for i, n in enumerate(lens):
        if count and count + n > cfg.max_tokens:
            groups.append((lo, i))
            lo, count = i, 0
        count += n
    if count or lo < len(lens):
        groups.append((lo, len(lens)))

    if len(groups) <= 1:
        return [mdoc]

    offsets = [0]
    for n in lens:
        offsets.append(offsets[-1] + n)

    segments: list[ModelDoc] = []
    for k, (s_lo, s_hi) in enumerate(groups):
        off = offsets[s_lo]
        segments.append(
            ModelDoc(
                doc_key=f"{mdoc.doc_key}#{k}",
                dataset=mdoc.dataset,
                sentences=mdoc.sentences[s_lo:s_hi],
                ner=tuple(
                    tuple((e[0] - off, e[1] - off, e[2]) for e in sent) for sent in mdoc.ner[s_lo:s_hi]
                ),
                relations=tuple(
                    tuple((r[0] - off, r[1] - off, r[2] - off, r[3] - off, r[4]) for r in sent)
                    for sent in mdoc.relations[s_lo:s_hi]
                ),
            )
        )
    return segments


def article_key(doc_key: str) -> str:
    return doc_key.partition("#")[0]


def structure_dataset(mdocs: Sequence[ModelDoc], cfg: SplitConfig) -> dict[str, list[ModelDoc]]:
    """Partition into train/dev/test at article granularity: all segments of
    one article land in the same split. The shuffle is seeded, so a given
    (corpus, seed) always yields the same membership."""
    articles = sorted({article_key(m.doc_key) for m in mdocs})
    if len(articles) < 3:
        raise ValueError(f"need at least 3 articles to split, got {len(articles)}")
    random.Random(cfg.seed).shuffle(articles)
    n = len(articles)
    c1 = round(n * cfg.ratios[0])
    c2 = round(n * (cfg.ratios[0] + cfg.ratios[1]))
    split_of: dict[str, str] = {}
    for i, art in enumerate(articles):
        split_of[art] = "train" if i < c1 else ("dev" if i < c2 else "test")
    out: dict[str, list[ModelDoc]] = {"train": [], "dev": [], "test": []}
    for m in mdocs:
        out[split_of[article_key(m.doc_key)]].append(m)
    return out


def _meta_from_floats(extra: Sequence[float]) -> dict[str, float] | None:
    if not extra:
        return None
    meta = {}
    for i, v in enumerate(extra):
        key = _CONFIDENCE_KEYS[i] if i < len(_CONFIDENCE_KEYS) else f"score{i + 1}"
        meta[key] = float(v)
    return meta


def ingest_predictions(pred_json: bytes | str, doc: Document, source: str = "model") -> AnnotationSet:
    """Turn prediction JSONL back into a gold-comparable AnnotationSet.

    Accepts entries keyed by the document itself or by its ``#k`` segments;
    segment token offsets are recovered by locating each segment's sentence
    block in the document. Unknown labels and out-of-range token indices are
    validation errors. Extra numeric fields per entry become mention metadata.
    """
    if isinstance(pred_json, bytes):
        pred_json = pred_json.decode("utf-8")
    entries = []
    for line in pred_json.splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        key = str(obj.get("doc_key", ""))
        if key == doc.doc_id or article_key(key) == doc.doc_id:
            entries.append((key, obj))
    if not entries:
        return AnnotationSet(source=source, doc_id=doc.doc_id, entities=(), relations=())

    def seg_index(key: str) -> int:
        _, sep, suffix = key.partition("#")
        return int(suffix) if sep else -1

    entries.sort(key=lambda kv: seg_index(kv[0]))
    if len(entries) > 1 and any(seg_index(k) == -1 for k, _ in entries):
        raise ValueError(f"{doc.doc_id}: predictions mix whole-document and segment keys")

    doc_sent_tokens: list[list[str]] = [[] for _ in doc.sentences]
    for t in doc.tokens:
        doc_sent_tokens[t.sentence].append(doc.text[t.start : t.end])
    sent_token_offsets = [0]
    for sent in doc_sent_tokens:
        sent_token_offsets.append(sent_token_offsets[-1] + len(sent))

    raw_entities: list[tuple[int, int, EntityType, int, int, dict | None]] = []
    raw_relations: list[tuple[tuple[int, int], tuple[int, int], RelationType, dict | None]] = []
    cursor = 0
    for key, obj in entries:
        seg_sents = [list(map(str, s)) for s in obj.get("sentences", [])]
        found = None
        for j in range(cursor, len(doc_sent_tokens) - len(seg_sents) + 1):
            if doc_sent_tokens[j : j + len(seg_sents)] == seg_sents:
                found = j
                break
        if found is None or not seg_sents:
            raise ValueError(f"{doc.doc_id}: segment {key} does not match the document's sentences")
        cursor = found + len(seg_sents)
        offset = sent_token_offsets[found]
        n_seg_tokens = sum(len(s) for s in seg_sents)

        pred_ner = obj.get("predicted_ner", [])
        pred_rel = obj.get("predicted_relations", [])
        if len(pred_ner) not in (0, len(seg_sents)) or len(pred_rel) not in (0, len(seg_sents)):
            raise ValueError(f"{doc.doc_id}: segment {key} prediction lists not parallel to sentences")
        for sent in pred_ner:
            for entry in sent:
                s_tok, e_tok, label = int(entry[0]), int(entry[1]), str(entry[2])
                if not (0 <= s_tok <= e_tok < n_seg_tokens):
                    raise ValueError(f"{doc.doc_id}: ner token span ({s_tok}, {e_tok}) out of range in {key}")
                etype = EntityType.parse(label)
                g_start, g_end = s_tok + offset, e_tok + offset
                meta = _meta_from_floats([float(v) for v in entry[3:]])
                raw_entities.append(
                    (g_start, g_end, etype, doc.tokens[g_start].start, doc.tokens[g_end].end, meta)
                )
        for sent in pred_rel:
            for entry in sent:
                s1, e1, s2, e2, label = (int(entry[0]), int(entry[1]), int(entry[2]), int(entry[3]), str(entry[4]))
                for s_tok, e_tok in ((s1, e1), (s2, e2)):
                    if not (0 <= s_tok <= e_tok < n_seg_tokens):
                        raise ValueError(
                            f"{doc.doc_id}: relation token span ({s_tok}, {e_tok}) out of range in {key}"
                        )
                rtype = RelationType.parse(label)
                meta = _meta_from_floats([float(v) for v in entry[5:]])
                raw_relations.append(((s1 + offset, e1 + offset), (s2 + offset, e2 + offset), rtype, meta))

    raw_entities.sort(key=lambda e: (e[3], e[4], e[2].value))
    entities: list[EntityMention] = []
    span_to_id: dict[tuple[int, int], str] = {}
    for i, (g_start, g_end, etype, c_start, c_end, meta) in enumerate(raw_entities):
        mid = f"T{i + 1}"
        entities.append(EntityMention(mid, etype, c_start, c_end, doc.text[c_start:c_end], meta=meta))
        span_to_id.setdefault((g_start, g_end), mid)

    relations: list[RelationMention] = []
    for k, (span1, span2, rtype, meta) in enumerate(raw_relations):
        id1 = span_to_id.get(span1)
        id2 = span_to_id.get(span2)
        if id1 is None or id2 is None:
            raise ValueError(f"{doc.doc_id}: predicted relation references a span missing from predicted_ner")
        relations.append(RelationMention(f"R{k + 1}", rtype, id1, id2, meta=meta))

    return AnnotationSet(source=source, doc_id=doc.doc_id, entities=tuple(entities), relations=tuple(relations))


@dataclass(frozen=True, slots=True)
class CorpusStats:
    n_articles: int
    n_model_docs: int
    n_sentences: int
    avg_sentences_per_article: float
    n_entities: int
    n_relations: int
    n_dropped_relations: int

    def to_obj(self) -> dict:
        return {
            "articles": self.n_articles,
            "model_docs": self.n_model_docs,
            "sentences": self.n_sentences,
            "avg_sentences_per_article": round(self.avg_sentences_per_article, 2),
            "entities": self.n_entities,
            "relations": self.n_relations,
            "dropped_cross_sentence_relations": self.n_dropped_relations,
        }


def corpus_stats(pairs: Iterable[tuple[Document, AnnotationSet]], cfg: SplitConfig | None = None) -> CorpusStats:
    """Corpus summary: article/doc/sentence/mention counts, with cross-sentence
    relation drops and post-split model-document counts included."""
    cfg = cfg or SplitConfig()
    n_articles = n_model_docs = n_sentences = n_entities = n_relations = n_dropped = 0
    for doc, aset in pairs:
        n_articles += 1
        n_sentences += len(doc.sentences)
        n_entities += len(aset.entities)
        n_relations += len(aset.relations)
        kept, dropped = filter_relations(aset, doc)
        n_dropped += len(dropped)
        mdoc = to_model_doc(doc, kept)
        n_model_docs += len(split_document(mdoc, cfg))
    avg = n_sentences / n_articles if n_articles else 0.0
    return CorpusStats(
        n_articles=n_articles,
        n_model_docs=n_model_docs,
        n_sentences=n_sentences,
        avg_sentences_per_article=avg,
        n_entities=n_entities,
        n_relations=n_relations,
        n_dropped_relations=n_dropped,
    )
