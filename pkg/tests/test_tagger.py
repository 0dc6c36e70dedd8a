"""Rule-based tagging: spec compilation, quantity/gazetteer/formula matching,
cue-driven retyping, and overlap resolution."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from orrmine import Document, EntityType, validate
from orrmine.tagger import (
    Gazetteer,
    MatcherSet,
    ParserSpec,
    compile_spec,
    default_specs,
    load_specs,
    normalize_for_match,
    save_specs,
    tag_document,
)

EMPTY_GAZETTEER = Gazetteer.from_mapping({})


def tag_text(text: str, specs=None, gazetteer=EMPTY_GAZETTEER):
    doc = Document.from_text("t", text)
    matchers = [compile_spec(s) for s in (specs if specs is not None else default_specs())]
    return doc, tag_document(doc, matchers, gazetteer=gazetteer)


def mention_set(aset):
    return {(m.start, m.end, m.etype, m.surface) for m in aset.entities}


class TestNormalize:
    @pytest.mark.parametrize(
        ("raw", "expected"),
        [
            ("cm-2", "cm-2"),
            ("cm⁻²", "cm-2"),
            ("cm−2", "cm-2"),
            ("cm$^{-2}$", "cm-2"),
            ("cm^{-2}", "cm-2"),
            ("m² g⁻¹", "m2 g-1"),
            ("1.83 W", "1.83 W"),
            ("plain text", "plain text"),
        ],
    )
    def test_equivalent_unit_renderings(self, raw: str, expected: str) -> None:
        norm, spans = normalize_for_match(raw)
        assert norm == expected
        assert len(spans) == len(norm)

    def test_spans_map_back_to_original(self) -> None:
        raw = "at 4 A cm$^{-2}$ here"
        norm, spans = normalize_for_match(raw)
        assert norm == "at 4 A cm-2 here"
        # Every normalized char's origin is a valid, monotonic range.
        last_start = -1
        for start, end in spans:
            assert 0 <= start < end <= len(raw)
            assert start >= last_start
            last_start = start


class TestSpecIO:
    def test_round_trip_obj(self) -> None:
        spec = ParserSpec(
            name="potential",
            target_etype=EntityType.VALUE,
            units=("V", "mV"),
            prefixes=("potential of",),
            change_words=(),
        )
        assert ParserSpec.from_obj(spec.to_obj()) == spec

    def test_save_and_load_file(self, tmp_path: Path) -> None:
        specs = [
            ParserSpec("a", EntityType.VALUE, units=("V",)),
            ParserSpec("b", EntityType.VALUE, change_words=("higher",)),
        ]
        out = tmp_path / "specs.json"
        save_specs(specs, out)
        assert load_specs(out) == specs

    def test_load_directory(self, tmp_path: Path) -> None:
        (tmp_path / "one.json").write_text(
            json.dumps({"name": "a", "target_etype": "value", "units": ["V"]}), encoding="utf-8"
        )
        (tmp_path / "two.json").write_text(
            json.dumps([{"name": "b", "target_etype": "value", "units": ["K"]}]), encoding="utf-8"
        )
        assert [s.name for s in load_specs(tmp_path)] == ["a", "b"]

    def test_duplicate_names_rejected(self, tmp_path: Path) -> None:
        payload = [
            {"name": "dup", "target_etype": "value", "units": ["V"]},
            {"name": "dup", "target_etype": "value", "units": ["K"]},
        ]
        out = tmp_path / "specs.json"
        out.write_text(json.dumps(payload), encoding="utf-8")
        with pytest.raises(ValueError, match="duplicate parser spec names"):
            load_specs(out)

    def test_default_specs_compile(self) -> None:
        matchers = [compile_spec(s) for s in default_specs()]
        assert len(matchers) >= 5
        assert all(isinstance(m, MatcherSet) for m in matchers)


class TestCompile:
    def test_empty_unit_rejected(self) -> None:
        with pytest.raises(ValueError, match="empty unit"):
            compile_spec(ParserSpec("x", EntityType.VALUE, units=("",)))

    @pytest.mark.parametrize("unit", ["a\tb", "a\nb"])
    def test_control_characters_rejected(self, unit: str) -> None:
        with pytest.raises(ValueError, match="tab or newline"):
            compile_spec(ParserSpec("x", EntityType.VALUE, units=(unit,)))

    def test_units_or_change_words_required(self) -> None:
        with pytest.raises(ValueError, match="at least one unit or change word"):
            compile_spec(ParserSpec("x", EntityType.VALUE, prefixes=("activity of",)))

    def test_prefix_only_is_invalid_but_unit_only_is_fine(self) -> None:
        compile_spec(ParserSpec("ok", EntityType.VALUE, units=("V",)))
        compile_spec(ParserSpec("ok2", EntityType.VALUE, change_words=("higher",)))


class TestQuantities:
    def test_number_with_unit(self) -> None:
        _, aset = tag_text("The cell reached a power density of 1.83 W cm-2 in testing.")
        assert (36, 47, EntityType.VALUE, "1.83 W cm-2") in mention_set(aset)

    @pytest.mark.parametrize(
        "rendering",
        ["1.83 W cm-2", "1.83 W cm⁻²", "1.83 W cm−2", "1.83 W cm$^{-2}$", "1.83 W cm-2"],
    )
    def test_unit_rendering_variants_all_match(self, rendering: str) -> None:
        _, aset = tag_text(f"It delivered {rendering} overall.")
        values = [m for m in aset.entities if m.etype is EntityType.VALUE]
        assert len(values) == 1
        assert values[0].surface == rendering

    def test_numeric_ranges(self) -> None:
        _, aset = tag_text("Scanning spanned 0.6-1.0 V and then 60 to 80 K exactly.")
        surfaces = {m.surface for m in aset.entities}
        assert "0.6-1.0 V" in surfaces
        assert "60 to 80 K" in surfaces

    def test_bare_number_without_unit_not_tagged(self) -> None:
        _, aset = tag_text("We measured 42 samples of graphite.")
        assert aset.entities == ()

    def test_unit_symbol_is_case_sensitive(self) -> None:
        _, aset = tag_text("It ran at 1600 RPM today.")
        assert aset.entities == ()  # spec says "rpm"

    def test_decimal_inside_larger_token_not_matched(self) -> None:
        _, aset = tag_text("Sample X1.83 W cm-2 labels exist.")
        # The digits belong to an identifier, not a freestanding number.
        assert "1.83 W cm-2" not in {m.surface for m in aset.entities}

    def test_at_cue_turns_value_into_condition(self) -> None:
        _, aset = tag_text("It held 0.67 V at 1.5 A cm-2 for hours.")
        mentions = mention_set(aset)
        assert (8, 14, EntityType.VALUE, "0.67 V") in mentions
        assert (18, 28, EntityType.CONDITION, "1.5 A cm-2") in mentions

    def test_under_cue_and_capitalized_cue(self) -> None:
        _, aset = tag_text("Under 80 K the cell froze. At 1600 rpm it spun.")
        etypes = {(m.surface, m.etype) for m in aset.entities}
        assert ("80 K", EntityType.CONDITION) in etypes
        assert ("1600 rpm", EntityType.CONDITION) in etypes

    def test_cue_must_be_adjacent_word(self) -> None:
        _, aset = tag_text("It worked at first with 0.9 V applied.")
        assert ("0.9 V", EntityType.VALUE) in {(m.surface, m.etype) for m in aset.entities}


class TestPhrases:
    def test_prefix_emits_property_and_trims_connective(self) -> None:
        _, aset = tag_text("The mass activity of the anode doubled.")
        assert ("mass activity", EntityType.PROPERTY) in {(m.surface, m.etype) for m in aset.entities}

    def test_change_word_emits_value(self) -> None:
        _, aset = tag_text("This gave a remarkable and wide plateau.")
        found = {(m.surface, m.etype) for m in aset.entities}
        assert ("remarkable", EntityType.VALUE) in found
        assert ("wide", EntityType.VALUE) in found

    def test_multiword_change_phrase_beats_single_word(self) -> None:
        _, aset = tag_text("Rates were 8.6 times higher overall.")
        surfaces = {m.surface for m in aset.entities}
        assert "times higher" in surfaces
        assert "higher" not in surfaces

    def test_phrases_are_case_insensitive(self) -> None:
        _, aset = tag_text("Mass Activity of the cell rose. REMARKABLE gains followed.")
        surfaces = {m.surface for m in aset.entities}
        assert "Mass Activity" in surfaces
        assert "REMARKABLE" in surfaces

    def test_word_boundaries_respected(self) -> None:
        _, aset = tag_text("The highway was highlighted.")
        assert aset.entities == ()


class TestGazetteerAndFormulas:
    def test_gazetteer_terms_typed(self) -> None:
        gaz = Gazetteer.from_mapping({"catalyst": ["PtCo"], "support": ["Ketjen Black"]})
        _, aset = tag_text("PtCo on Ketjen Black worked.", specs=[], gazetteer=gaz)
        assert mention_set(aset) == {
            (0, 4, EntityType.CATALYST, "PtCo"),
            (8, 20, EntityType.SUPPORT, "Ketjen Black"),
        }

    def test_plain_phrases_case_insensitive_formulas_not(self) -> None:
        gaz = Gazetteer.from_mapping({"catalyst": ["PtCo"], "support": ["carbon support"]})
        _, aset = tag_text("The Carbon Support held. No ptco or PTCO matched here.", specs=[], gazetteer=gaz)
        assert {(m.surface, m.etype) for m in aset.entities} == {("Carbon Support", EntityType.SUPPORT)}

    def test_unknown_formula_falls_back_to_other_material(self) -> None:
        _, aset = tag_text("A ZrO2 film and a NiFe sheet were added.", specs=[])
        found = {(m.surface, m.etype) for m in aset.entities}
        assert ("ZrO2", EntityType.OTHER_MATERIAL) in found
        assert ("NiFe", EntityType.OTHER_MATERIAL) in found

    def test_formula_in_gazetteer_keeps_its_class(self) -> None:
        gaz = Gazetteer.from_mapping({"precursors": ["PtCl2"]})
        _, aset = tag_text("Fresh PtCl2 was dissolved.", specs=[], gazetteer=gaz)
        assert {(m.surface, m.etype) for m in aset.entities} == {("PtCl2", EntityType.PRECURSORS)}

    def test_single_element_word_not_a_formula(self) -> None:
        _, aset = tag_text("In 2019 the cell ran. He agreed. No formulas here.", specs=[])
        assert aset.entities == ()

    def test_invalid_element_sequences_rejected(self) -> None:
        _, aset = tag_text("The DOE report and IEEE spec arrived.", specs=[])
        assert aset.entities == ()

    def test_parenthesized_and_slashed_formulas(self) -> None:
        _, aset = tag_text("Both Pt(NH3)2 and Pt/C appeared.", specs=[])
        surfaces = {m.surface for m in aset.entities}
        assert "Pt(NH3)2" in surfaces
        assert "Pt/C" in surfaces

    def test_formula_not_matched_inside_word(self) -> None:
        _, aset = tag_text("The laPtCo2x variant failed.", specs=[])
        assert aset.entities == ()


class TestResolution:
    def test_longest_match_wins(self) -> None:
        gaz = Gazetteer.from_mapping({"catalyst": ["commercial Pt/C"]})
        _, aset = tag_text("A commercial Pt/C sample was used.", specs=[], gazetteer=gaz)
        assert {(m.surface, m.etype) for m in aset.entities} == {
            ("commercial Pt/C", EntityType.CATALYST)
        }

    def test_same_span_condition_beats_value(self) -> None:
        specs = [
            ParserSpec("as_value", EntityType.VALUE, units=("V",)),
            ParserSpec("as_condition", EntityType.CONDITION, units=("V",)),
        ]
        _, aset = tag_text("It read 0.9 V exactly.", specs=specs)
        assert [(m.surface, m.etype) for m in aset.entities] == [("0.9 V", EntityType.CONDITION)]

    def test_registration_order_irrelevant(self) -> None:
        doc = Document.from_text("t", "The mass activity of PtCo rose 8.6 times higher at 1600 rpm.")
        matchers = [compile_spec(s) for s in default_specs()]
        gaz = Gazetteer.default()
        forward = tag_document(doc, matchers, gazetteer=gaz)
        backward = tag_document(doc, list(reversed(matchers)), gazetteer=gaz)
        assert mention_set(forward) == mention_set(backward)
        assert [m.id for m in forward.entities] == [m.id for m in backward.entities]

    def test_ids_dense_and_ordered_by_position(self) -> None:
        _, aset = tag_text("It gave 0.9 V at 80 K after work.", specs=default_specs())
        assert [m.id for m in aset.entities] == [f"T{i + 1}" for i in range(len(aset.entities))]
        starts = [m.start for m in aset.entities]
        assert starts == sorted(starts)

    def test_no_overlapping_output_spans(self) -> None:
        doc, aset = tag_text(
            "The mass activity of commercial Pt/C at 1600 rpm was 0.1 A mg-1 and remarkable."
        )
        spans = sorted(m.span for m in aset.entities)
        for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
            assert e1 <= s2


class TestDocumentLevel:
    def test_matches_stay_inside_sentences(self) -> None:
        doc, aset = tag_text("The run used 0.9 V. Remarkable gains at 80 K followed.")
        for m in aset.entities:
            first = doc.sentence_index_at(m.start)
            last = doc.sentence_index_at(m.end - 1)
            assert first == last is not None

    def test_output_validates_cleanly(self) -> None:
        doc, aset = tag_text(
            "The mass activity of PtCo at 1600 rpm was 0.1 A mg-1. Remarkable durability followed."
        )
        report = validate(aset, doc)
        assert report.ok
        assert aset.source == "default"
        assert aset.relations == ()

    def test_demo_document_quantities(self, demo_pair) -> None:
        doc, _ = demo_pair
        matchers = [compile_spec(s) for s in default_specs()]
        aset = tag_document(doc, matchers, gazetteer=Gazetteer.default())
        found = {(m.surface, m.etype) for m in aset.entities}
        assert ("1.83 W cm-2", EntityType.VALUE) in found
        assert ("4 A cm-2", EntityType.CONDITION) in found

    def test_tagging_is_deterministic(self, demo_pair) -> None:
        doc, _ = demo_pair
        matchers = [compile_spec(s) for s in default_specs()]
        first = tag_document(doc, matchers)
        second = tag_document(doc, matchers)
        assert first == second
