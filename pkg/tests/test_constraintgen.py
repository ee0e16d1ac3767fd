import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amr2asp.asp_core import normalize_tokens
from amr2asp.constraintgen import (
    analyze,
    choose_form,
    compile_corpus,
    compile_graph,
    emit_constraint,
    plan_ordinal_rewrites,
    resolve_positions,
    rewrite_ordinals,
)
from amr2asp.errors import (
    AmbiguousOrdinal,
    CompileError,
    NoAnchors,
    NoNumericCategory,
    OrdinalOutOfRange,
    UnboundVariable,
    UnsupportedSpatialRelation,
)
from amr2asp.knowledge import build_kb
from amr2asp.penman import parse_penman

from conftest import golden_text


def _tokens(text: str):
    return [normalize_tokens(line) for line in text.strip().splitlines()]


class TestGoldenConstraints:
    def test_zoo_block(self, zoo):
        golden = _tokens(golden_text("zoo_constraints_head.lp"))
        produced = [normalize_tokens(c.text) for c in zoo.compiled[:5]]
        assert produced == golden

    def test_einstein_block(self, einstein):
        golden = _tokens(golden_text("einstein_constraints_head.lp"))
        produced = [normalize_tokens(c.text) for c in einstein.compiled[:4]]
        assert produced == golden

    def test_full_corpus_compiles(self, zoo, einstein):
        assert len(zoo.compiled) == 18
        assert len(einstein.compiled) == 14

    def test_johan_corrected(self, zoo):
        (compiled,) = [c for c in zoo.compiled if c.sentence == "Johan is not last in line."]
        assert compiled.text == ':- order_in_line_of("Johan",5).'

    def test_johan_faulty_flips_polarity(self, zoo, faulty_johan):
        compiled = compile_graph(faulty_johan, zoo.kb)
        assert compiled.text == ':- not order_in_line_of("Johan",5).'


class TestOrdinals:
    def test_middle_of_five(self, einstein):
        graph = parse_penman("(h / house :mod (m / middle))")
        (rewrite,) = plan_ordinal_rewrites(graph, einstein.kb)
        assert rewrite.resolved == 3
        rewritten = rewrite_ordinals(graph, einstein.kb)
        assert rewritten.nodes["m"].concept == "ordinal-entity"
        assert rewritten.nodes["m"].attribute(":value") == "3"

    def test_last_is_domain_size(self, zoo):
        graph = parse_penman("(o / ordinal-entity :value -1)")
        (rewrite,) = plan_ordinal_rewrites(graph, zoo.kb)
        assert rewrite.resolved == 5

    def test_last_keyword(self, zoo):
        graph = parse_penman("(l / last)")
        (rewrite,) = plan_ordinal_rewrites(graph, zoo.kb)
        assert rewrite.resolved == 5

    def test_positive_value_is_identity(self, zoo):
        graph = parse_penman("(o / ordinal-entity :value 1)")
        (rewrite,) = plan_ordinal_rewrites(graph, zoo.kb)
        assert rewrite.resolved == 1

    def test_middle_even_is_ambiguous(self):
        kb = build_kb(
            [("house", ["a", "b", "c", "d"]), ("position", [1, 2, 3, 4])],
            pairing_names=["position"],
            reference_name="house",
        )
        with pytest.raises(AmbiguousOrdinal):
            plan_ordinal_rewrites(parse_penman("(m / middle)"), kb)

    def test_out_of_range(self, zoo):
        with pytest.raises(OrdinalOutOfRange):
            plan_ordinal_rewrites(parse_penman("(o / ordinal-entity :value 9)"), zoo.kb)
        with pytest.raises(OrdinalOutOfRange):
            plan_ordinal_rewrites(parse_penman("(o / ordinal-entity :value 0)"), zoo.kb)

    def test_no_numeric_category(self):
        kb = build_kb([("a", ["x", "y"]), ("b", ["p", "q"])], pairing_names=["b"])
        with pytest.raises(NoNumericCategory):
            plan_ordinal_rewrites(parse_penman("(m / middle)"), kb)

    def test_graph_without_markers_passes_through(self, zoo):
        graph = parse_penman("(a / apple)")
        assert rewrite_ordinals(graph, zoo.kb) is graph


class TestPositions:
    def test_right_of(self, einstein):
        compiled = [c for c in einstein.compiled if "O1 != O2+1" in c.text]
        green = [c for c in compiled if "green" in c.text]
        assert green[0].text == (
            ':- position_of("green",O1), position_of("ivory",O2), O1 != O2+1.'
        )

    def test_left_of(self, einstein):
        graph = parse_penman(
            """
            (b / be-located-at-91
                :ARG1 (h / house
                    :mod (i / ivory))
                :ARG2 (r / relative-position
                    :op1 (h2 / house
                        :mod (g / green))
                    :direction (l / left)))
            """
        )
        compiled = compile_graph(graph, einstein.kb)
        assert compiled.text == (
            ':- position_of("ivory",O1), position_of("green",O2), O1 != O2-1.'
        )

    def test_next_to_rules_on_both_sides(self, einstein):
        (compiled,) = [
            c for c in einstein.compiled
            if c.sentence == "The cigar Chesterfields is next to the pet fox."
        ]
        assert compiled.text == (
            ':- cigar_of(H1,"chesterfields"), position_of(H1,O1), '
            'pet_of(H2,"fox"), position_of(H2,O2), O1 != O2+1, O1 != O2-1.'
        )

    def test_next_to_reference_constant(self, einstein):
        (compiled,) = [
            c for c in einstein.compiled
            if c.sentence == "The nationality Norwegian is next to the blue house."
        ]
        assert compiled.text == (
            ':- nationality_of(H1,"norwegian"), position_of(H1,O1), '
            'position_of("blue",O2), O1 != O2+1, O1 != O2-1.'
        )

    def test_behind_is_unsupported(self, einstein):
        graph = parse_penman(
            "(b / be-located-at-91 :ARG1 (h / house :mod (g / green)) "
            ":location (r / behind :op1 (h2 / house :mod (i / ivory))))"
        )
        with pytest.raises(UnsupportedSpatialRelation):
            compile_graph(graph, einstein.kb)

    def test_unknown_direction_is_unsupported(self, einstein):
        graph = parse_penman(
            "(b / be-located-at-91 :ARG1 (h / house :mod (g / green)) "
            ":ARG2 (r / relative-position :op1 (h2 / house :mod (i / ivory)) "
            ":direction (d / above)))"
        )
        with pytest.raises(UnsupportedSpatialRelation):
            compile_graph(graph, einstein.kb)

    def test_missing_side_anchor(self, einstein):
        graph = parse_penman(
            "(b / be-located-at-91 :ARG1 (h / house) "
            ":location (n / next-to :op1 (h2 / house :mod (b2 / blue))))"
        )
        with pytest.raises(CompileError):
            compile_graph(graph, einstein.kb)


class TestFormChoice:
    def test_relational_with_free_reference_is_choice(self, zoo):
        graph = [g for g in zoo.graphs if g.sentence.startswith("The girl whose")][0]
        draft = analyze(rewrite_ordinals(graph, zoo.kb), zoo.kb)
        assert choose_form(draft) == "choice"

    def test_fully_constant_is_integrity(self, zoo):
        graph = [g for g in zoo.graphs if g.sentence.startswith("Naomi's favorite")][0]
        draft = analyze(graph, zoo.kb)
        assert choose_form(draft) == "integrity"

    def test_shared_variable_no_relational_is_integrity(self, einstein):
        graph = [g for g in einstein.graphs if "Spaniard" in g.sentence][0]
        draft = analyze(graph, einstein.kb)
        assert choose_form(draft) == "integrity"

    def test_forms_across_corpus(self, zoo):
        forms = [c.form for c in zoo.compiled]
        assert forms.count("choice") == 4  # three girl-tigers clues plus boy-second
        assert forms.count("integrity") == 14


class TestAnalysis:
    def test_receive_draft_contents(self, zoo):
        graph = [g for g in zoo.graphs if "hearts" in g.sentence and "girl" in g.sentence][0]
        draft = analyze(graph, zoo.kb)
        assert {(c.category, c.constant) for c in draft.constants} == {
            ("favorite_animal", "tigers"), ("balloon_design", "hearts"),
        }
        assert {(r.pairing.rule_name, r.negated) for r in draft.rules} == {
            ("balloon_design_of", True), ("favorite_animal_of", False),
        }
        assert [(r.predicate, r.value) for r in draft.relational] == [("gender_of", "girl")]

    def test_no_anchors(self, zoo):
        with pytest.raises(NoAnchors):
            analyze(parse_penman("(x / xylophone :mod (q / quartz))"), zoo.kb)

    def test_corpus_skips_unmatched(self, zoo):
        graphs = [parse_penman("# ::snt Nothing matches here.\n(x / xylophone)")]
        compiled, skipped = compile_corpus(graphs + zoo.graphs[:1], zoo.kb)
        assert len(compiled) == 1
        assert skipped[0].sentence == "Nothing matches here."

    def test_unbound_variable_rejected(self, zoo):
        # A lone rule with no constants would emit a single-use variable.
        graph = parse_penman("(f / favor-01)")
        with pytest.raises((UnboundVariable, CompileError)):
            compile_graph(graph, zoo.kb)

    def test_determinism(self, zoo):
        texts = [c.text for c in zoo.compiled]
        again, _ = compile_corpus(zoo.graphs, zoo.kb)
        assert [c.text for c in again] == texts


# ---------------------------------------------------------------- property


_names = st.sampled_from(["Kerry", "Johan", "Mario", "Lani", "Naomi"])
_animals = st.sampled_from(["chimpanzee", "tiger", "zebra", "lion", "giraffe"])


@given(_names, _animals, st.booleans())
@settings(max_examples=60, deadline=None)
def test_polarity_toggles_not_and_nothing_else(name, animal, negated):
    kb = build_kb(
        [
            ("child", ["Kerry", "Johan", "Mario", "Lani", "Naomi"]),
            ("favorite_animal", ["chimpanzees", "tigers", "zebras", "lions", "giraffes"]),
        ],
        pairing_names=["favorite_animal"],
        reference_name="child",
    )
    polarity = "\n    :polarity -" if negated else ""
    graph = parse_penman(
        f"""(f / favor-01{polarity}
    :ARG0 (p / person
        :name (n / name
            :op1 "{name}"))
    :ARG1 (a / {animal}))"""
    )
    compiled = compile_graph(graph, kb)
    literal = f'favorite_animal_of("{name}","{animal}s")'
    if negated:
        assert compiled.text == f":- {literal}."
    else:
        assert compiled.text == f":- not {literal}."
