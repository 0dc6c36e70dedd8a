"""Phrase-query filtering and ranking of candidate articles.

Queries are boolean expressions over quoted or bare phrases with AND/OR and
parentheses; AND binds tighter. A phrase matches case-insensitively on word
boundaries inside the allowed sections only. Ranking sums occurrence counts
of the ranking phrases over those sections.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .model import Document, Section

DEFAULT_QUERY = 'ORR AND Catalyst AND (ECSA OR "mass activity" OR "ORR activity" OR "surface activity")'
DEFAULT_RANKING_PHRASES = ("mass activity", "ORR activity")
DEFAULT_SECTIONS = ("abstract", "results", "discussion", "conclusions")
DEFAULT_TOP_N = 76


@dataclass(frozen=True, slots=True)
class Phrase:
    text: str

    def evaluate(self, text: str) -> bool:
        return bool(_phrase_pattern(self.text).search(text))


@dataclass(frozen=True, slots=True)
class And:
    parts: tuple

    def evaluate(self, text: str) -> bool:
        return all(p.evaluate(text) for p in self.parts)


@dataclass(frozen=True, slots=True)
class Or:
    parts: tuple

    def evaluate(self, text: str) -> bool:
        return any(p.evaluate(text) for p in self.parts)


_PHRASE_CACHE: dict[str, re.Pattern] = {}


def _phrase_pattern(phrase: str) -> re.Pattern:
    pat = _PHRASE_CACHE.get(phrase)
    if pat is None:
        body = r"\s+".join(re.escape(w) for w in phrase.split())
        pat = re.compile(rf"(?<!\w){body}(?!\w)", re.IGNORECASE)
        _PHRASE_CACHE[phrase] = pat
    return pat


_QUERY_TOKEN = re.compile(r'"([^"]*)"|(\()|(\))|([^\s()"]+)')


def parse_query(query: str):
    """Parse a boolean phrase query; grammar: or := and (OR and)*,
    and := atom (AND atom)*, atom := phrase | "(" or ")"."""
    tokens: list[tuple[str, str]] = []
    for m in _QUERY_TOKEN.finditer(query):
        if m.group(1) is not None:
            tokens.append(("phrase", m.group(1)))
        elif m.group(2):
            tokens.append(("(", "("))
        elif m.group(3):
            tokens.append((")", ")"))
        else:
            word = m.group(4)
            if word.upper() in ("AND", "OR"):
                tokens.append((word.upper(), word))
            else:
                tokens.append(("phrase", word))

    pos = 0

    def peek() -> str | None:
        return tokens[pos][0] if pos < len(tokens) else None

    def take(kind: str) -> str:
        nonlocal pos
        if peek() != kind:
            raise ValueError(f"bad query {query!r}: expected {kind} at token {pos}")
        value = tokens[pos][1]
        pos += 1
        return value

    def parse_or():
        parts = [parse_and()]
        while peek() == "OR":
            take("OR")
            parts.append(parse_and())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def parse_and():
        parts = [parse_atom()]
        while peek() == "AND":
            take("AND")
            parts.append(parse_atom())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def parse_atom():
        kind = peek()
        if kind == "phrase":
            text = take("phrase")
            if not text.strip():
                raise ValueError(f"bad query {query!r}: empty phrase")
            return Phrase(text)
        if kind == "(":
            take("(")
            node = parse_or()
            take(")")
            return node
        raise ValueError(f"bad query {query!r}: unexpected token at {pos}")

    if not tokens:
        raise ValueError("empty query")
    node = parse_or()
    if pos != len(tokens):
        raise ValueError(f"bad query {query!r}: trailing tokens")
    return node


@dataclass(frozen=True, slots=True)
class SelectorQuery:
    expression: str = DEFAULT_QUERY
    ranking_phrases: tuple[str, ...] = DEFAULT_RANKING_PHRASES
    sections: tuple[str, ...] = DEFAULT_SECTIONS
    top_n: int = DEFAULT_TOP_N

    def node(self):
        return parse_query(self.expression)


def _allowed_text(doc: Document, allowed: Sequence[str]) -> str:
    keys = tuple(a.lower() for a in allowed)
    chunks = []
    for section in doc.sections:
        name = section.name.lower()
        if any(key in name for key in keys):
            chunks.append(doc.text[section.start : section.end])
    return "\n".join(chunks)


def filter_articles(docs: Iterable[Document], query: SelectorQuery) -> list[Document]:
    """Keep documents whose allowed-section text satisfies the expression."""
    node = query.node()
    return [doc for doc in docs if node.evaluate(_allowed_text(doc, query.sections))]


def rank_articles(docs: Iterable[Document], query: SelectorQuery) -> list[tuple[str, int]]:
    """Filter, then rank by summed ranking-phrase occurrence counts, ties by
    doc_id ascending; at most top_n rows."""
    scored = []
    for doc in filter_articles(docs, query):
        text = _allowed_text(doc, query.sections)
        score = sum(len(_phrase_pattern(p).findall(text)) for p in query.ranking_phrases)
        scored.append((doc.doc_id, score))
    scored.sort(key=lambda row: (-row[1], row[0]))
    return scored[: query.top_n]


def load_section_doc(path: str | Path) -> Document:
    """Load ``{doc_id, sections: [{name, text}]}`` JSON into a Document; the
    full text is the section texts joined by blank lines."""
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    doc_id = str(obj["doc_id"])
    sections: list[Section] = []
    chunks: list[str] = []
    offset = 0
    for i, sec in enumerate(obj.get("sections", [])):
        name = str(sec.get("name", f"section{i}"))
        text = str(sec.get("text", ""))
        sections.append(Section(name, offset, offset + len(text)))
        chunks.append(text)
        offset += len(text) + 2  # "\n\n" joint
    full = "\n\n".join(chunks)
    return Document.from_text(doc_id, full, sections=sections)


def load_section_docs(directory: str | Path) -> list[Document]:
    directory = Path(directory)
    docs = [load_section_doc(p) for p in sorted(directory.glob("*.json"))]
    return docs


def render_ranking(rows: list[tuple[str, int]]) -> str:
    return "".join(f"{doc_id}\t{score}\n" for doc_id, score in rows)
