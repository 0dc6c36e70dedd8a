"""Rule-based sentence and token segmentation.

Sentence boundaries sit after a run of ``.``/``?``/``!`` that is followed by
whitespace and then an uppercase letter. A ``.`` boundary is suppressed when
the text up to it ends with a known abbreviation, so decimals ("1.83") and
citation shorthand ("et al.") never split. Tokens are whitespace chunks with
edge punctuation peeled into single-character tokens; concatenating token
surfaces with the original gaps reconstructs the text exactly.
"""

from __future__ import annotations

import re
import unicodedata

DEFAULT_ABBREVIATIONS: tuple[str, ...] = ("e.g.", "i.e.", "Fig.", "et al.", "ca.", "vs.")

_TERMINALS = ".?!"
_CHUNK = re.compile(r"\S+")


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _boundaries(text: str, abbreviations: tuple[str, ...]) -> list[int]:
    bounds: list[int] = []
    n = len(text)
    for i, ch in enumerate(text):
        if ch not in _TERMINALS:
            continue
        if i + 1 < n and text[i + 1] in _TERMINALS:
            continue  # defer to the end of the punctuation run
        j = i + 1
        k = j
        while k < n and text[k].isspace():
            k += 1
        if k == j or k >= n or not text[k].isupper():
            continue
        if ch == "." and any(text[:j].endswith(abbr) for abbr in abbreviations):
            continue
        bounds.append(j)
    return bounds


def segment(
    text: str, abbreviations: tuple[str, ...] = DEFAULT_ABBREVIATIONS
) -> tuple[tuple[tuple[int, int], ...], tuple[tuple[int, int, int], ...]]:
    """Split ``text`` into sentence ranges and ``(start, end, sentence)`` tokens.

    Total on any input; empty or whitespace-only text yields no sentences and
    no tokens. Idempotent: boundaries depend only on the text.
    """
    sentences: list[tuple[int, int]] = []
    tokens: list[tuple[int, int, int]] = []
    if not text:
        return (), ()

    cuts = [0, *_boundaries(text, abbreviations), len(text)]
    for left, right in zip(cuts, cuts[1:]):
        start, end = left, right
        while start < end and text[start].isspace():
            start += 1
        while end > start and text[end - 1].isspace():
            end -= 1
        if start == end:
            continue
        sent_index = len(sentences)
        sentences.append((start, end))
        for match in _CHUNK.finditer(text, start, end):
            tokens.extend(_split_chunk(text, match.start(), match.end(), sent_index))
    return tuple(sentences), tuple(tokens)


def _split_chunk(text: str, start: int, end: int, sentence: int) -> list[tuple[int, int, int]]:
    # Peel punctuation off both edges one character at a time; the remainder
    # (which may hold internal punctuation, "cm-2", "1.83") stays whole.
    head: list[tuple[int, int, int]] = []
    tail: list[tuple[int, int, int]] = []
    left, right = start, end
    while left < right and _is_punct(text[left]):
        head.append((left, left + 1, sentence))
        left += 1
    while right > left and _is_punct(text[right - 1]):
        tail.append((right - 1, right, sentence))
        right -= 1
    core = [(left, right, sentence)] if left < right else []
    return head + core + list(reversed(tail))
