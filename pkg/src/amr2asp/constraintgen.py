"""Compile one simplified constraint sentence plus its AMR graph into an
ASP integrity constraint or choice rule.

The compiler walks the graph in preorder, classifies every concept against
the knowledge base (constants of interest, pairing rules of interest,
relational values), resolves ordinal and spatial markers, assigns the
negation carried by ``:polarity -`` tags, and picks between the choice and
integrity emission forms.  All of it is deterministic: the same sentence,
graph, and knowledge base always produce the same statement text.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .asp_core import (
    Arith,
    BodyElement,
    ChoiceElement,
    ChoiceRule,
    Comparison,
    Constant,
    Integer,
    IntegrityConstraint,
    Literal,
    Statement,
    Term,
    Variable,
    emit_statement,
)
from .errors import (
    AmbiguousOrdinal,
    CompileError,
    NoAnchors,
    NoNumericCategory,
    OrdinalOutOfRange,
    UnboundVariable,
    UnsupportedSpatialRelation,
)
from .knowledge import (
    ConstantOfInterest,
    Entity,
    KnowledgeBase,
    PairingPredicate,
    RelationalValue,
    RuleOfInterest,
    match_concept,
)
from .penman import AmrGraph, AmrNode, polarity_scope

ORDINAL_CONCEPT = "ordinal-entity"
_ORDINAL_WORDS = {"middle", "last"}
_SPATIAL_MARKERS = {"next-to", "relative-position"}
_DIRECTIONS = {"right", "left"}
# Attribute roles that never carry matchable constants.
_NON_CONSTANT_ROLES = {":polarity", ":value", ":direction", ":mode"}


# ------------------------------------------------------------------ types


@dataclass(frozen=True)
class OrdinalRewrite:
    node_id: str
    raw: str
    resolved: int


@dataclass
class ConstantNote:
    category: str
    constant: Entity
    node_id: str
    depth: int
    order: int
    used: bool = False


@dataclass
class RelationalNote:
    predicate: str
    value: str
    node_id: str


@dataclass
class RuleAnchor:
    pairing: PairingPredicate
    node_id: str
    depth: int
    order: int
    negated: bool = False
    ref_const: Entity | None = None
    value_const: Entity | None = None
    value_node: str | None = None
    synthesized: bool = False


@dataclass
class SpatialNote:
    node_id: str
    kind: str  # 'next', 'right', 'left'


@dataclass
class ConstraintDraft:
    source_sentence: str | None
    reference_category: str = ""
    constants: list[ConstantNote] = field(default_factory=list)
    rules: list[RuleAnchor] = field(default_factory=list)
    relational: list[RelationalNote] = field(default_factory=list)
    spatial: SpatialNote | None = None
    position_body: list[BodyElement] = field(default_factory=list)
    arithmetic: list[Comparison] = field(default_factory=list)
    bindings: dict[str, str] = field(default_factory=dict)
    form: str | None = None  # 'integrity' | 'choice'

    @property
    def ref_const(self) -> Entity | None:
        for anchor in self.rules:
            if anchor.ref_const is not None:
                return anchor.ref_const
        return None

    def sorted_rules(self) -> list[RuleAnchor]:
        return sorted(self.rules, key=lambda a: (a.depth, a.order))

    def sentence_negated(self) -> bool:
        return any(a.negated for a in self.rules)


@dataclass(frozen=True)
class CompiledConstraint:
    sentence: str | None
    statement: Statement
    form: str
    text: str


@dataclass(frozen=True)
class SkippedSentence:
    sentence: str | None
    reason: str


# -------------------------------------------------------- ordinal rewriting


def _numeric_domain(kb: KnowledgeBase):
    numeric = kb.numeric_category()
    if numeric is None:
        raise NoNumericCategory(
            "ordinal or positional language needs exactly one numeric category"
        )
    return numeric


def plan_ordinal_rewrites(graph: AmrGraph, kb: KnowledgeBase) -> list[OrdinalRewrite]:
    """Resolve every ordinal marker to a concrete 1..n position."""
    markers: list[tuple[str, str]] = []
    for node in graph.nodes.values():
        if node.concept == ORDINAL_CONCEPT:
            markers.append((node.id, node.attribute(":value") or ""))
        elif node.concept in _ORDINAL_WORDS:
            markers.append((node.id, node.concept))
    if not markers:
        return []
    size = len(_numeric_domain(kb).entities)

    rewrites = []
    for node_id, raw in markers:
        if raw == "middle":
            if size % 2 == 0:
                raise AmbiguousOrdinal(f"'middle' is ambiguous for {size} positions")
            resolved = (size + 1) // 2
        elif raw == "last":
            resolved = size
        else:
            try:
                value = int(raw)
            except ValueError:
                raise OrdinalOutOfRange(f"ordinal-entity node {node_id!r} has no integer :value")
            resolved = value if value > 0 else size + 1 + value
        if not 1 <= resolved <= size:
            raise OrdinalOutOfRange(f"ordinal {raw!r} resolves to {resolved}, outside 1..{size}")
        rewrites.append(OrdinalRewrite(node_id, raw, resolved))
    return rewrites


def rewrite_ordinals(graph: AmrGraph, kb: KnowledgeBase) -> AmrGraph:
    """Replace ordinal words and relative ``:value`` tags with resolved
    ``ordinal-entity`` nodes; graphs without ordinal markers pass through."""
    rewrites = plan_ordinal_rewrites(graph, kb)
    if not rewrites:
        return graph
    nodes = dict(graph.nodes)
    for rewrite in rewrites:
        node = nodes[rewrite.node_id]
        attributes = tuple(
            (role, value) for role, value in node.attributes if role != ":value"
        ) + ((":value", str(rewrite.resolved)),)
        nodes[rewrite.node_id] = AmrNode(node.id, ORDINAL_CONCEPT, attributes)
    return replace(graph, nodes=nodes)


# ----------------------------------------------------------------- analysis


def _spatial_note(graph: AmrGraph) -> SpatialNote | None:
    for concept in ("behind",):
        if any(n.concept == concept for n in graph.nodes.values()):
            raise UnsupportedSpatialRelation(f"spatial relation {concept!r} is not handled")
    for node_id, _ in graph.preorder():
        node = graph.nodes[node_id]
        if node.concept not in _SPATIAL_MARKERS:
            continue
        if node.concept == "next-to":
            return SpatialNote(node_id, "next")
        direction = None
        for edge in graph.edges_from(node_id):
            if edge.role == ":direction":
                direction = graph.nodes[edge.target].concept
        if direction is None:
            direction = node.attribute(":direction")
        if direction not in _DIRECTIONS:
            raise UnsupportedSpatialRelation(
                f"relative position {direction!r} is not handled"
            )
        return SpatialNote(node_id, direction)
    return None


def analyze(graph: AmrGraph, kb: KnowledgeBase) -> ConstraintDraft:
    """Classify every concept, fill rule slots, and assign polarity flags.

    Expects ordinal markers to be rewritten already (``rewrite_ordinals``);
    the returned draft has no emission form chosen yet.
    """
    draft = ConstraintDraft(graph.sentence, reference_category=kb.reference)
    draft.spatial = _spatial_note(graph)
    skip_nodes: set[str] = set()
    if draft.spatial is not None:
        skip_nodes.add(draft.spatial.node_id)
        for edge in graph.edges_from(draft.spatial.node_id):
            if edge.role == ":direction":
                skip_nodes.add(edge.target)

    numeric_name = kb.numeric_category().name if kb.numeric_category() else None
    order_index = {node_id: i for i, (node_id, _) in enumerate(graph.preorder())}
    depths = graph.depths()

    def note_match(result, node_id: str) -> None:
        depth, order = depths[node_id], order_index[node_id]
        if isinstance(result, ConstantOfInterest):
            draft.constants.append(
                ConstantNote(result.category, result.constant, node_id, depth, order)
            )
        elif isinstance(result, RuleOfInterest):
            if all(a.pairing != result.pairing for a in draft.rules):
                draft.rules.append(RuleAnchor(result.pairing, node_id, depth, order))
        elif isinstance(result, RelationalValue):
            if all(
                (r.predicate, r.value) != (result.predicate, result.value)
                for r in draft.relational
            ):
                draft.relational.append(RelationalNote(result.predicate, result.value, node_id))

    for node_id, _ in graph.preorder():
        if node_id in skip_nodes:
            continue
        node = graph.nodes[node_id]
        if node.concept == ORDINAL_CONCEPT:
            if numeric_name is None:
                raise NoNumericCategory("ordinal marker with no numeric category")
            raw = node.attribute(":value") or ""
            try:
                value = int(raw)
            except ValueError:
                raise OrdinalOutOfRange(f"ordinal-entity node {node_id!r} has no integer :value")
            if value not in kb.category(numeric_name).entities:
                raise OrdinalOutOfRange(
                    f"ordinal {value} outside the {numeric_name} domain (run rewrite_ordinals first?)"
                )
            draft.constants.append(
                ConstantNote(numeric_name, value, node_id, depths[node_id], order_index[node_id])
            )
            continue
        note_match(match_concept(kb, node.concept), node_id)
        for role, value in node.attributes:
            if role in _NON_CONSTANT_ROLES:
                continue
            note_match(match_concept(kb, value), node_id)

    if not draft.constants and not draft.rules and not draft.relational:
        raise NoAnchors(
            f"no concept matched the knowledge base: {graph.sentence or '<no sentence>'}"
        )

    _assign_slots(draft, kb)
    _assign_polarity(draft, graph)
    return draft


def _assign_slots(draft: ConstraintDraft, kb: KnowledgeBase) -> None:
    ref_note = next((c for c in draft.constants if c.category == kb.reference), None)
    if ref_note is not None:
        ref_note.used = True

    for anchor in draft.sorted_rules():
        for note in draft.constants:
            if not note.used and note.category == anchor.pairing.category:
                note.used = True
                anchor.value_const = note.constant
                anchor.value_node = note.node_id
                break
        if ref_note is not None and draft.spatial is None:
            anchor.ref_const = ref_note.constant

    # A leftover pairing-category constant implies its rule even when no
    # concept named the rule itself (e.g. a bare ordinal).
    for note in draft.constants:
        if note.used:
            continue
        pairing = kb.pairing_for_category(note.category)
        if pairing is None:
            continue
        note.used = True
        draft.rules.append(
            RuleAnchor(
                pairing,
                note.node_id,
                note.depth,
                note.order,
                ref_const=None if draft.spatial is not None or ref_note is None else ref_note.constant,
                value_const=note.constant,
                value_node=note.node_id,
                synthesized=True,
            )
        )


def _assign_polarity(draft: ConstraintDraft, graph: AmrGraph) -> None:
    scope = polarity_scope(graph)
    if not scope:
        return
    eligible = [
        anchor
        for anchor in draft.sorted_rules()
        if anchor.node_id in scope or (anchor.value_node and anchor.value_node in scope)
    ]
    if eligible:
        eligible[0].negated = True


# ------------------------------------------------------------- form choice


def choose_form(draft: ConstraintDraft) -> str:
    """Choice when a relational fact joins in and the reference binding is
    still a variable; everything else is an integrity constraint."""
    if draft.spatial is None and draft.relational and draft.ref_const is None:
        return "choice"
    return "integrity"


# ---------------------------------------------------------------- position


def resolve_positions(graph: AmrGraph, draft: ConstraintDraft, kb: KnowledgeBase) -> ConstraintDraft:
    """Compile next-to / right-of / left-of relations into position literals
    plus arithmetic atoms that exclude the forbidden layouts."""
    if draft.spatial is None:
        return draft
    if draft.sentence_negated():
        raise UnsupportedSpatialRelation("negated positional constraints are not handled")
    numeric = _numeric_domain(kb)
    numeric_pairing = kb.pairing_for_category(numeric.name)
    if numeric_pairing is None:
        raise NoNumericCategory(f"numeric category {numeric.name!r} is not a pairing")

    inside = graph.descendants(draft.spatial.node_id)
    subject_rules = [a for a in draft.rules if a.node_id not in inside and a.pairing != numeric_pairing]
    object_rules = [a for a in draft.rules if a.node_id in inside and a.pairing != numeric_pairing]
    ref_consts = [c for c in draft.constants if c.category == kb.reference]
    subject_refs = [c for c in ref_consts if c.node_id not in inside]
    object_refs = [c for c in ref_consts if c.node_id in inside]

    ref_letter = numeric_pairing.var_letters[0]
    pos_letter = "O" if ref_letter != "O" else "P"
    body: list[BodyElement] = []
    position_vars: list[Variable] = []

    for index, (rules, refs) in enumerate(
        ((subject_rules, subject_refs), (object_rules, object_refs)), start=1
    ):
        pos_var = Variable(f"{pos_letter}{index}")
        position_vars.append(pos_var)
        draft.bindings[pos_var.name] = numeric.name
        if rules:
            anchor = sorted(rules, key=lambda a: (a.depth, a.order))[0]
            if anchor.value_const is None:
                raise CompileError(
                    f"positional anchor {anchor.pairing.rule_name} has no constant"
                )
            ref_var = Variable(f"{ref_letter}{index}")
            draft.bindings[ref_var.name] = kb.reference
            body.append(Literal(anchor.pairing.rule_name, (ref_var, _value_term(anchor.value_const))))
            body.append(Literal(numeric_pairing.rule_name, (ref_var, pos_var)))
        elif refs:
            body.append(
                Literal(
                    numeric_pairing.rule_name,
                    (_value_term(refs[0].constant), pos_var),
                )
            )
        else:
            side = "subject" if index == 1 else "object"
            raise CompileError(f"positional constraint has no anchor on its {side} side")

    o1, o2 = position_vars
    if draft.spatial.kind == "right":
        draft.arithmetic = [Comparison(o1, "!=", Arith(o2, "+", Integer(1)))]
    elif draft.spatial.kind == "left":
        draft.arithmetic = [Comparison(o1, "!=", Arith(o2, "-", Integer(1)))]
    else:
        draft.arithmetic = [
            Comparison(o1, "!=", Arith(o2, "+", Integer(1))),
            Comparison(o1, "!=", Arith(o2, "-", Integer(1))),
        ]
    draft.position_body = body
    return draft


# ----------------------------------------------------------------- emission


def _value_term(value: Entity) -> Term:
    return Integer(value) if isinstance(value, int) else Constant(value, quoted=True)


def _rule_literal(anchor: RuleAnchor, ref_term: Term, negated: bool = False) -> Literal:
    if anchor.value_const is None:
        raise UnboundVariable(
            f"rule {anchor.pairing.rule_name} has no constant for its value slot"
        )
    return Literal(anchor.pairing.rule_name, (ref_term, _value_term(anchor.value_const)), negated)


def _check_variable_use(statement: Statement) -> None:
    counts: dict[str, int] = {}

    def count_terms(terms):
        for term in terms:
            if isinstance(term, Variable):
                counts[term.name] = counts.get(term.name, 0) + 1
            elif isinstance(term, Arith):
                count_terms((term.left, term.right))

    def count_element(element: BodyElement) -> None:
        if isinstance(element, Comparison):
            count_terms((element.left, element.right))
        else:
            count_terms(element.terms)

    if isinstance(statement, IntegrityConstraint):
        for e in statement.body:
            count_element(e)
    elif isinstance(statement, ChoiceRule):
        for el in statement.elements:
            count_terms(el.target.terms)
            for c in el.conditions:
                count_element(c)
        for e in statement.body:
            count_element(e)
    lonely = sorted(name for name, n in counts.items() if n < 2)
    if lonely:
        raise UnboundVariable(
            f"variable(s) {lonely} occur only once in: {emit_statement(statement)}"
        )


def emit_constraint(draft: ConstraintDraft) -> Statement:
    """Emit the chosen form.  Pure function of the draft: identical drafts
    produce byte-identical statements."""
    if draft.form is None:
        draft.form = choose_form(draft)

    if draft.spatial is not None:
        if not draft.position_body:
            raise CompileError("positional draft was not resolved (run resolve_positions)")
        statement: Statement = IntegrityConstraint(
            tuple(draft.position_body) + tuple(draft.arithmetic)
        )
        _check_variable_use(statement)
        return statement

    anchors = draft.sorted_rules()
    if not anchors:
        raise CompileError("constraint has no pairing rule to anchor it")

    ref_letter = anchors[0].pairing.var_letters[0]
    if draft.ref_const is not None:
        ref_term: Term = _value_term(draft.ref_const)
    else:
        ref_term = Variable(ref_letter)
        draft.bindings[ref_letter] = draft.reference_category

    relational_literals = [
        Literal(note.predicate, (ref_term, Constant(note.value, quoted=True)))
        for note in draft.relational
    ]

    if draft.form == "choice":
        positives = [a for a in anchors if not a.negated]
        if not positives:
            raise CompileError("choice form needs at least one positive rule anchor")
        target_anchor = positives[0]
        conditions: list[BodyElement] = [
            _rule_literal(a, ref_term, negated=a.negated)
            for a in anchors
            if a is not target_anchor
        ] + relational_literals
        statement = ChoiceRule(
            1, 1, (ChoiceElement(_rule_literal(target_anchor, ref_term), tuple(conditions)),)
        )
        _check_variable_use(statement)
        return statement

    consequent, context = anchors[0], anchors[1:]
    body: list[BodyElement] = [_rule_literal(a, ref_term) for a in context]
    body.extend(relational_literals)
    negate_consequent = not draft.sentence_negated()
    if not body:
        statement = IntegrityConstraint(
            (_rule_literal(consequent, ref_term, negated=negate_consequent),)
        )
    else:
        body.append(_rule_literal(consequent, ref_term, negated=negate_consequent))
        statement = IntegrityConstraint(tuple(body))
    _check_variable_use(statement)
    return statement


# ------------------------------------------------------------- orchestration


def compile_graph(graph: AmrGraph, kb: KnowledgeBase) -> CompiledConstraint:
    """Full pipeline for one sentence graph: ordinals, analysis, positions,
    form choice, emission."""
    rewritten = rewrite_ordinals(graph, kb)
    draft = analyze(rewritten, kb)
    if draft.spatial is not None:
        draft = resolve_positions(rewritten, draft, kb)
    draft.form = choose_form(draft)
    statement = emit_constraint(draft)
    return CompiledConstraint(graph.sentence, statement, draft.form, emit_statement(statement))


def compile_corpus(
    graphs: list[AmrGraph], kb: KnowledgeBase
) -> tuple[list[CompiledConstraint], list[SkippedSentence]]:
    """Compile every graph in input order.  Graphs whose concepts match
    nothing are reported and skipped; any other failure is fatal."""
    compiled: list[CompiledConstraint] = []
    skipped: list[SkippedSentence] = []
    for graph in graphs:
        try:
            compiled.append(compile_graph(graph, kb))
        except NoAnchors as err:
            skipped.append(SkippedSentence(graph.sentence, str(err)))
    return compiled, skipped
