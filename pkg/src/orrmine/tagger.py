"""Rule-based default tagging: quantity parsers plus a gazetteer.

A parser spec declares unit symbols, property prefix phrases, and qualitative
change words for one target type. Compiled matchers find number+unit
quantities (unit symbols case-sensitive, normalized across superscript and
LaTeX renderings), prefix and change phrases (case-insensitive), gazetteer
terms, and bare chemical formulas. Matches never cross sentence boundaries,
overlaps resolve longest-first then leftmost, and a quantity directly
preceded by an "at"/"under" cue becomes a condition instead of a value.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .model import AnnotationSet, Document, EntityMention, EntityType

# Candidate ranks: lower wins when two candidates cover the same span.
_RANK_UNIT = 0
_RANK_GAZETTEER = 1
_RANK_PREFIX = 2
_RANK_CHANGE = 3
_RANK_FORMULA = 4

_CUE_WORDS = frozenset({"at", "under"})

_NUM = r"[+-]?(?:\d+(?:\.\d+)?|\.\d+)(?:[ ]?(?:[-–~]|to)[ ]?[+-]?(?:\d+(?:\.\d+)?|\.\d+))?"

_SUPERSCRIPTS = {
    "⁰": "0", "¹": "1", "²": "2", "³": "3", "⁴": "4",
    "⁵": "5", "⁶": "6", "⁷": "7", "⁸": "8", "⁹": "9",
    "⁺": "+", "⁻": "-",
}
_CHAR_MAP = {
    **_SUPERSCRIPTS,
    "−": "-",  # minus sign
    " ": " ",  # no-break space
    " ": " ",  # thin space
    " ": " ",  # narrow no-break space
}
_LATEX_SUP = re.compile(r"\$\^\{([^{}]*)\}\$|\^\{([^{}]*)\}")

_ELEMENTS = frozenset(
    "H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni Cu Zn "
    "Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe Cs Ba La "
    "Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au Hg Tl Pb Bi Po "
    "At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr Rf Db Sg Bh Hs Mt Ds Rg "
    "Cn Nh Fl Mc Lv Ts Og".split()
)
_FORMULA_PART = r"(?:[A-Z][a-z]?\d*|\((?:[A-Z][a-z]?\d*)+\)\d*)+"
_FORMULA = re.compile(rf"(?<![A-Za-z0-9])({_FORMULA_PART}(?:/{_FORMULA_PART})*)(?![a-z0-9])")
_ELEMENT_TOKEN = re.compile(r"[A-Z][a-z]?")


def normalize_for_match(text: str) -> tuple[str, list[tuple[int, int]]]:
    """Rewrite superscript/LaTeX/odd-space renderings into plain ASCII.

    Returns the normalized string and, per normalized character, the original
    code-point range it came from, so match spans can be mapped back.
    """
    chars: list[str] = []
    spans: list[tuple[int, int]] = []
    i = 0
    n = len(text)
    while i < n:
        m = _LATEX_SUP.match(text, i)
        if m:
            content = m.group(1) if m.group(1) is not None else m.group(2)
            for ch in content:
                chars.append(_CHAR_MAP.get(ch, ch))
                spans.append((m.start(), m.end()))
            i = m.end()
            continue
        ch = text[i]
        chars.append(_CHAR_MAP.get(ch, ch))
        spans.append((i, i + 1))
        i += 1
    return "".join(chars), spans


@dataclass(frozen=True, slots=True)
class ParserSpec:
    """Declarative matcher input for one target entity type."""

    name: str
    target_etype: EntityType
    units: tuple[str, ...] = ()
    prefixes: tuple[str, ...] = ()
    change_words: tuple[str, ...] = ()

    def to_obj(self) -> dict:
        return {
            "name": self.name,
            "target_etype": self.target_etype.value,
            "units": list(self.units),
            "prefixes": list(self.prefixes),
            "change_words": list(self.change_words),
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "ParserSpec":
        return cls(
            name=str(obj["name"]),
            target_etype=EntityType.parse(obj.get("target_etype", "value")),
            units=tuple(obj.get("units", ())),
            prefixes=tuple(obj.get("prefixes", ())),
            change_words=tuple(obj.get("change_words", ())),
        )


def load_specs(path: str | Path) -> list[ParserSpec]:
    """Read parser specs from a JSON file (one object or a list) or from a
    directory of ``*.json`` files. Names must be unique."""
    path = Path(path)
    objs: list[dict] = []
    if path.is_dir():
        for p in sorted(path.glob("*.json")):
            loaded = json.loads(p.read_text(encoding="utf-8"))
            objs.extend(loaded if isinstance(loaded, list) else [loaded])
    else:
        loaded = json.loads(path.read_text(encoding="utf-8"))
        objs.extend(loaded if isinstance(loaded, list) else [loaded])
    specs = [ParserSpec.from_obj(o) for o in objs]
    names = [s.name for s in specs]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ValueError(f"duplicate parser spec names: {dupes}")
    return specs


def save_specs(specs: list[ParserSpec], path: str | Path) -> None:
    Path(path).write_text(json.dumps([s.to_obj() for s in specs], indent=2) + "\n", encoding="utf-8")


def default_specs() -> list[ParserSpec]:
    data = resources.files("orrmine.data").joinpath("default_specs.json").read_text(encoding="utf-8")
    return [ParserSpec.from_obj(o) for o in json.loads(data)]


@dataclass(frozen=True, slots=True)
class MatcherSet:
    """Compiled patterns for one ParserSpec."""

    name: str
    target_etype: EntityType
    unit_patterns: tuple[tuple[str, re.Pattern], ...]
    prefix_patterns: tuple[tuple[str, re.Pattern], ...]
    change_patterns: tuple[tuple[str, re.Pattern], ...]


def _word_pattern(phrase: str) -> re.Pattern:
    body = r"\s+".join(re.escape(w) for w in phrase.split())
    return re.compile(rf"(?<!\w){body}(?!\w)", re.IGNORECASE)


def compile_spec(spec: ParserSpec) -> MatcherSet:
    """Compile one spec. Unit symbols are normalized like document text, kept
    case-sensitive, and ordered longest-first for deterministic matching."""
    for unit in spec.units:
        if not unit:
            raise ValueError(f"spec {spec.name!r}: empty unit string")
        if "\t" in unit or "\n" in unit:
            raise ValueError(f"spec {spec.name!r}: unit {unit!r} contains tab or newline")
    if not spec.units and not spec.change_words:
        raise ValueError(f"spec {spec.name!r}: needs at least one unit or change word")

    unit_patterns = []
    for unit in sorted(set(spec.units), key=lambda u: (-len(u), u)):
        norm, _ = normalize_for_match(unit)
        pat = re.compile(rf"(?<![\w.\-])({_NUM})[ ]?{re.escape(norm)}(?!\w)")
        unit_patterns.append((unit, pat))
    prefix_patterns = tuple(
        (p, _word_pattern(p)) for p in sorted(set(spec.prefixes), key=lambda s: (-len(s), s)) if p.strip()
    )
    change_patterns = tuple(
        (w, _word_pattern(w)) for w in sorted(set(spec.change_words), key=lambda s: (-len(s), s)) if w.strip()
    )
    return MatcherSet(
        name=spec.name,
        target_etype=spec.target_etype,
        unit_patterns=tuple(unit_patterns),
        prefix_patterns=prefix_patterns,
        change_patterns=change_patterns,
    )


@dataclass(frozen=True, slots=True)
class Gazetteer:
    """Seed lexicon of known material terms by entity type."""

    patterns: tuple[tuple[str, EntityType, re.Pattern], ...]
    exact: dict = field(compare=False, default_factory=dict)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "Gazetteer":
        rows: list[tuple[str, EntityType, re.Pattern]] = []
        exact: dict[str, EntityType] = {}
        for label in sorted(mapping):
            etype = EntityType.parse(label)
            for term in sorted(set(mapping[label]), key=lambda t: (-len(t), t)):
                if not term.strip():
                    continue
                body = r"\s+".join(re.escape(w) for w in term.split())
                # Formula-shaped terms stay case-sensitive; plain phrases don't.
                flags = 0 if _looks_like_formula(term) else re.IGNORECASE
                rows.append((term, etype, re.compile(rf"(?<![\w\-]){body}(?![\w\-])", flags)))
                exact[term] = etype
        return cls(patterns=tuple(rows), exact=exact)

    @classmethod
    def default(cls) -> "Gazetteer":
        data = resources.files("orrmine.data").joinpath("gazetteer.json").read_text(encoding="utf-8")
        return cls.from_mapping(json.loads(data))

    @classmethod
    def from_file(cls, path: str | Path) -> "Gazetteer":
        return cls.from_mapping(json.loads(Path(path).read_text(encoding="utf-8")))


def _looks_like_formula(term: str) -> bool:
    return any(ch.isdigit() for ch in term) or bool(re.search(r"[a-z][A-Z]|/|\(", term)) or term.isupper()


def _valid_formula(candidate: str) -> bool:
    symbols = _ELEMENT_TOKEN.findall(candidate)
    if not symbols or any(s not in _ELEMENTS for s in symbols):
        return False
    has_marker = any(ch.isdigit() for ch in candidate) or "(" in candidate or "/" in candidate
    return has_marker or len(symbols) >= 2


_TRAILING_CONNECTIVE = re.compile(r"\s+(?:of|of\s+the)\s*$", re.IGNORECASE)


def tag_document(
    doc: Document,
    matchers: MatcherSet | list[MatcherSet] | tuple[MatcherSet, ...],
    gazetteer: Gazetteer | None = None,
) -> AnnotationSet:
    """Produce the deterministic default annotation layer for one document.

    Output is independent of matcher registration order; no span crosses a
    sentence boundary; no relations are emitted; source is "default".
    """
    if isinstance(matchers, MatcherSet):
        matchers = (matchers,)
    matchers = tuple(sorted(matchers, key=lambda m: m.name))
    if gazetteer is None:
        gazetteer = Gazetteer.default()

    # Candidates: (start, end, etype, rank, tiebreak)
    candidates: list[tuple[int, int, EntityType, int, str]] = []
    for sent_start, sent_end in doc.sentences:
        sent = doc.text[sent_start:sent_end]
        norm, spans = normalize_for_match(sent)

        for mset in matchers:
            for unit, pat in mset.unit_patterns:
                for m in pat.finditer(norm):
                    start = sent_start + spans[m.start()][0]
                    end = sent_start + spans[m.end() - 1][1]
                    etype = mset.target_etype
                    if etype is EntityType.VALUE and _has_cue(doc.text, sent_start, start):
                        etype = EntityType.CONDITION
                    candidates.append((start, end, etype, _RANK_UNIT, unit))
            for phrase, pat in mset.prefix_patterns:
                for m in pat.finditer(sent):
                    matched = sent[m.start() : m.end()]
                    trimmed = _TRAILING_CONNECTIVE.sub("", matched)
                    if not trimmed:
                        continue
                    start = sent_start + m.start()
                    candidates.append((start, start + len(trimmed), EntityType.PROPERTY, _RANK_PREFIX, phrase))
            for word, pat in mset.change_patterns:
                for m in pat.finditer(sent):
                    candidates.append(
                        (sent_start + m.start(), sent_start + m.end(), mset.target_etype, _RANK_CHANGE, word)
                    )

        for term, etype, pat in gazetteer.patterns:
            for m in pat.finditer(sent):
                candidates.append((sent_start + m.start(), sent_start + m.end(), etype, _RANK_GAZETTEER, term))

        for m in _FORMULA.finditer(sent):
            cand = m.group(1)
            if not _valid_formula(cand):
                continue
            etype = gazetteer.exact.get(cand, EntityType.OTHER_MATERIAL)
            candidates.append((sent_start + m.start(1), sent_start + m.end(1), etype, _RANK_FORMULA, cand))

    accepted = _resolve_overlaps(candidates)
    entities = tuple(
        EntityMention(f"T{i + 1}", etype, start, end, doc.text[start:end])
        for i, (start, end, etype) in enumerate(accepted)
    )
    return AnnotationSet(source="default", doc_id=doc.doc_id, entities=entities, relations=())


def _has_cue(text: str, sent_start: int, match_start: int) -> bool:
    # The word immediately before the quantity, in the same sentence.
    before = text[sent_start:match_start]
    m = re.search(r"([A-Za-z]+)\s*$", before)
    return bool(m) and m.group(1).lower() in _CUE_WORDS


def _resolve_overlaps(
    candidates: list[tuple[int, int, EntityType, int, str]],
) -> list[tuple[int, int, EntityType]]:
    # Same-span duplicates first: condition beats value, then lowest rank.
    by_span: dict[tuple[int, int], list[tuple[int, int, EntityType, int, str]]] = {}
    for cand in candidates:
        by_span.setdefault((cand[0], cand[1]), []).append(cand)
    deduped = []
    for span in by_span:
        group = by_span[span]
        conditions = [c for c in group if c[2] is EntityType.CONDITION]
        pool = conditions or group
        deduped.append(min(pool, key=lambda c: (c[3], c[2].value, c[4])))

    deduped.sort(key=lambda c: (-(c[1] - c[0]), c[0], c[2].value, c[3]))
    taken: list[tuple[int, int]] = []
    out: list[tuple[int, int, EntityType]] = []
    for start, end, etype, _rank, _tie in deduped:
        if any(start < t_end and end > t_start for t_start, t_end in taken):
            continue
        taken.append((start, end))
        out.append((start, end, etype))
    out.sort(key=lambda c: (c[0], c[1]))
    return out
