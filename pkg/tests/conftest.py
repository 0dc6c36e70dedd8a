"""Shared fixtures: the checked-in demo document and synthetic corpus builders."""

from __future__ import annotations

import random
from contextlib import contextmanager
from pathlib import Path

import pytest

from orrmine import AnnotationSet, Document, EntityMention, EntityType, RelationMention, RelationType
from orrmine.brat import read_pair

DATA_DIR = Path(__file__).parent / "data"

_WORDS = (
    "the catalyst layer shows stable performance under load cycling and keeps "
    "its activity after many hours of operation in the cell while the support "
    "material holds the particles firmly"
).split()
_FORMULAS = ("PtCo", "Al2O3", "PtCl2", "SiO2", "CoPt3")
_ETYPES = tuple(EntityType)


def make_sentence(rng: random.Random) -> str:
    n = rng.randint(4, 9)
    words = [rng.choice(_WORDS) for _ in range(n)]
    if rng.random() < 0.4:
        words[rng.randrange(n)] = rng.choice(_FORMULAS)
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def make_document(rng: random.Random, doc_id: str, n_sentences: int | None = None) -> Document:
    n_sentences = n_sentences or rng.randint(2, 6)
    text = " ".join(make_sentence(rng) for _ in range(n_sentences))
    return Document.from_text(doc_id, text)


def make_annotations(
    rng: random.Random,
    doc: Document,
    n_entities: int,
    n_relations: int,
    cross_sentence: int | None = None,
    source: str = "gold",
) -> AnnotationSet:
    """Random token-aligned mentions plus relations.

    With ``cross_sentence=None`` relation endpoints are unconstrained; with an
    int, exactly that many relations cross sentences and the rest stay within
    one (the caller must make that satisfiable).
    """
    entities: list[EntityMention] = []
    spans_taken: set[tuple[int, int]] = set()
    tokens = doc.tokens
    guard = 0
    while len(entities) < n_entities and guard < 1000:
        guard += 1
        i = rng.randrange(len(tokens))
        width = rng.randint(0, 2)
        j = min(i + width, len(tokens) - 1)
        if tokens[i].sentence != tokens[j].sentence:
            j = i
        span = (tokens[i].start, tokens[j].end)
        if span in spans_taken:
            continue
        spans_taken.add(span)
        etype = rng.choice(_ETYPES)
        entities.append(
            EntityMention(f"T{len(entities) + 1}", etype, span[0], span[1], doc.text[span[0] : span[1]])
        )
    assert len(entities) == n_entities, "document too small for requested entities"

    sent_of = {m.id: doc.sentence_index_at(m.start) for m in entities}
    relations: list[RelationMention] = []
    pairs_taken: set[tuple[str, str]] = set()

    def add_relation(want_cross: bool | None) -> bool:
        for _ in range(1000):
            a, b = rng.sample(entities, 2)
            if (a.id, b.id) in pairs_taken:
                continue
            crosses = sent_of[a.id] != sent_of[b.id]
            if want_cross is not None and crosses != want_cross:
                continue
            pairs_taken.add((a.id, b.id))
            rtype = RelationType.RELATED_TO if rng.random() < 0.8 else RelationType.EQUIVALENT
            relations.append(RelationMention(f"R{len(relations) + 1}", rtype, a.id, b.id))
            return True
        return False

    for _ in range(cross_sentence or 0):
        assert add_relation(True), "could not place a cross-sentence relation"
    while len(relations) < n_relations:
        want = False if cross_sentence is not None else None
        assert add_relation(want), "could not place a within-sentence relation"
    return AnnotationSet(source=source, doc_id=doc.doc_id, entities=tuple(entities), relations=tuple(relations))


def make_conservation_pair() -> tuple[Document, AnnotationSet, int]:
    """Deterministic 10-sentence document with 40 token-aligned entities and
    25 relations, exactly 5 of which cross a sentence boundary. Returns the
    document, the annotations, and the cross-sentence count."""
    sentence_words = [[f"W{i}a", f"w{i}b", f"w{i}c", f"w{i}d", f"w{i}e"] for i in range(10)]
    text = " ".join(" ".join(words) + "." for words in sentence_words)
    doc = Document.from_text("conserve", text)
    assert len(doc.sentences) == 10

    etypes = tuple(EntityType)
    entities: list[EntityMention] = []
    per_sentence: list[list[EntityMention]] = []
    for i in range(10):
        sent_tokens = [t for t in doc.tokens if t.sentence == i]
        row = []
        for j in range(4):
            tok = sent_tokens[j]
            m = EntityMention(
                f"T{len(entities) + 1}",
                etypes[(4 * i + j) % len(etypes)],
                tok.start,
                tok.end,
                doc.text[tok.start : tok.end],
            )
            entities.append(m)
            row.append(m)
        per_sentence.append(row)

    relations: list[RelationMention] = []
    for i in range(10):  # 2 within-sentence relations per sentence
        relations.append(
            RelationMention(f"R{len(relations) + 1}", RelationType.RELATED_TO, per_sentence[i][0].id, per_sentence[i][1].id)
        )
        relations.append(
            RelationMention(f"R{len(relations) + 1}", RelationType.RELATED_TO, per_sentence[i][2].id, per_sentence[i][3].id)
        )
    for i in range(5):  # and 5 that cross into the next sentence
        relations.append(
            RelationMention(f"R{len(relations) + 1}", RelationType.RELATED_TO, per_sentence[i][0].id, per_sentence[i + 1][0].id)
        )
    aset = AnnotationSet(source="gold", doc_id="conserve", entities=tuple(entities), relations=tuple(relations))
    return doc, aset, 5


@pytest.fixture(scope="session")
def demo_pair() -> tuple[Document, AnnotationSet]:
    return read_pair(DATA_DIR / "demo_doc" / "ptco_demo.txt")


@pytest.fixture(scope="session")
def prediction_fixture_text() -> str:
    return (DATA_DIR / "predictions" / "ptco_demo_pred.jsonl").read_text(encoding="utf-8")


# Acceptance bookkeeping: each gate in test_acceptance.py records one line here,
# and the hook below prints the block after the normal pytest summary.
ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


@contextmanager
def acceptance_criterion(name: str):
    try:
        yield
    except BaseException:
        ACCEPTANCE_RESULTS.append((name, False))
        raise
    ACCEPTANCE_RESULTS.append((name, True))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
