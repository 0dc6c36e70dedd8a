"""Sentence segmentation and tokenization.

Expected values below are hand-derived from the rules: sentence cuts at
[.?!]+ followed by whitespace and an uppercase letter (suppressed after known
abbreviations), tokens are whitespace chunks with edge punctuation peeled one
character at a time.
"""

from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from orrmine.segment import DEFAULT_ABBREVIATIONS, segment


def spans(text: str):
    sentences, tokens = segment(text)
    return sentences, [(start, end) for start, end, _ in tokens]


def test_two_sentences_hand_oracle() -> None:
    text = "PtCo was made. It works."
    sentences, tokens = spans(text)
    assert sentences == ((0, 14), (15, 24))
    assert tokens == [(0, 4), (5, 8), (9, 13), (13, 14), (15, 17), (18, 23), (23, 24)]


def test_decimal_number_does_not_split() -> None:
    text = "activity of 1.83 W cm-2 at 4 A cm-2."
    sentences, tokens = segment(text)
    assert sentences == ((0, 36),)
    surfaces = [text[start:end] for start, end, _ in tokens]
    assert surfaces == ["activity", "of", "1.83", "W", "cm-2", "at", "4", "A", "cm-2", "."]


def test_abbreviations_suppress_boundary() -> None:
    for abbr in DEFAULT_ABBREVIATIONS:
        text = f"Results follow {abbr} The value rose."
        sentences, _ = segment(text)
        assert len(sentences) == 1, abbr


def test_abbreviation_list_is_configurable() -> None:
    text = "Results follow cf. The value rose."
    assert len(segment(text)[0]) == 2
    assert len(segment(text, abbreviations=("cf.",))[0]) == 1


def test_boundary_needs_uppercase_after_whitespace() -> None:
    assert len(segment("It stopped. then it ran.")[0]) == 1
    assert len(segment("It stopped. Then it ran.")[0]) == 2
    assert len(segment("It stopped.Then it ran.")[0]) == 1


def test_punctuation_run_splits_once_at_run_end() -> None:
    text = "Really?! Yes."
    sentences, _ = segment(text)
    assert sentences == ((0, 8), (9, 13))


def test_question_and_exclamation_boundaries() -> None:
    sentences, _ = segment("Does it work? It does! Fine.")
    assert len(sentences) == 3


def test_edge_punctuation_peeled_layer_by_layer() -> None:
    text = "(PtCo), made."
    _, tokens = segment(text)
    surfaces = [text[start:end] for start, end, _ in tokens]
    assert surfaces == ["(", "PtCo", ")", ",", "made", "."]


def test_interior_punctuation_kept() -> None:
    text = "Pt/C is state-of-the-art."
    _, tokens = segment(text)
    surfaces = [text[start:end] for start, end, _ in tokens]
    assert surfaces == ["Pt/C", "is", "state-of-the-art", "."]


def test_tokens_carry_sentence_index() -> None:
    text = "PtCo was made. It works."
    _, tokens = segment(text)
    assert [sent for _, _, sent in tokens] == [0, 0, 0, 0, 1, 1, 1]


def test_empty_and_whitespace_only_text() -> None:
    assert segment("") == ((), ())
    assert segment("   \n\t ") == ((), ())


text_strategy = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",)),
    max_size=300,
)


@settings(max_examples=200, deadline=None)
@given(text_strategy)
def test_token_reconstruction_invariant(text: str) -> None:
    """Concatenating token surfaces with the gaps between them restores the text
    covered by sentences, and every token stays inside its sentence."""
    sentences, tokens = segment(text)
    for tok_start, tok_end, tok_sentence in tokens:
        assert 0 <= tok_start < tok_end <= len(text)
        s_start, s_end = sentences[tok_sentence]
        assert s_start <= tok_start and tok_end <= s_end
        surface = text[tok_start:tok_end]
        assert surface == surface.strip()
        assert surface
    for earlier, later in zip(tokens, tokens[1:]):
        assert earlier[1] <= later[0]
        between = text[earlier[1] : later[0]]
        assert between.strip() == ""
    joined = "".join(text[start:end] for start, end, _ in tokens)
    expected = "".join(ch for start, end in sentences for ch in text[start:end] if not ch.isspace())
    assert joined == expected


@settings(max_examples=200, deadline=None)
@given(text_strategy)
def test_sentences_ordered_and_trimmed(text: str) -> None:
    sentences, _ = segment(text)
    previous_end = -1
    for start, end in sentences:
        assert 0 <= start < end <= len(text)
        assert start > previous_end
        previous_end = end
        chunk = text[start:end]
        assert chunk == chunk.strip()


@settings(max_examples=100, deadline=None)
@given(text_strategy)
def test_segmentation_is_deterministic(text: str) -> None:
    assert segment(text) == segment(text)
