"""Problem-instance knowledge: categories with entity domains, relational
facts, one-to-one pairing predicates, and the concept-matching rules the
constraint compiler relies on.

A concept coming out of an AMR graph is matched against the knowledge base
through a fixed normalization chain (lowercase, PropBank sense stripped,
hyphens as underscores, singular/plural, predicate-token and stem matches).
Definite entity matches beat pairing-predicate matches; entities that are
the value side of a relational predicate match as relational values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .errors import (
    AmbiguousMatch,
    DuplicateCategory,
    EmptyCategory,
    KnowledgeError,
    UnknownReference,
)

_NAME_RE = re.compile(r"[a-z][a-z0-9_]*$")
_SENSE_SUFFIX_RE = re.compile(r"_\d{2,}$")
_MIN_TOKEN = 3
_MIN_STEM = 4

Entity = Union[str, int]


@dataclass(frozen=True)
class Category:
    name: str
    entities: tuple[Entity, ...]
    numeric: bool = False


@dataclass(frozen=True)
class RelationalFact:
    predicate: str
    pairs: tuple[tuple[str, str], ...]

    def values(self) -> list[str]:
        return [right for _, right in self.pairs]

    def holds(self, left: Entity, right: Entity) -> bool:
        return (str(left), str(right)) in {(l, r) for l, r in self.pairs}


@dataclass(frozen=True)
class PairingPredicate:
    category: str
    rule_name: str
    reference: str
    var_letters: tuple[str, str]  # (reference-var, category-var)


@dataclass(frozen=True)
class KnowledgeBase:
    categories: tuple[Category, ...]
    relational: tuple[RelationalFact, ...]
    pairings: tuple[PairingPredicate, ...]
    reference: str

    def category(self, name: str) -> Category:
        for cat in self.categories:
            if cat.name == name:
                return cat
        raise KnowledgeError(f"no category named {name!r}")

    @property
    def reference_category(self) -> Category:
        return self.category(self.reference)

    def pairing_for_category(self, category: str) -> PairingPredicate | None:
        for pairing in self.pairings:
            if pairing.category == category:
                return pairing
        return None

    def pairing_for_rule(self, rule_name: str) -> PairingPredicate | None:
        for pairing in self.pairings:
            if pairing.rule_name == rule_name:
                return pairing
        return None

    def relational_for(self, predicate: str) -> RelationalFact | None:
        for fact in self.relational:
            if fact.predicate == predicate:
                return fact
        return None

    def numeric_category(self) -> Category | None:
        numeric = [c for c in self.categories if c.numeric]
        return numeric[0] if len(numeric) == 1 else None

    def solution_categories(self) -> list[Category]:
        """Categories contributing a solution-tuple slot, in declaration
        order: the reference plus every paired category."""
        paired = {p.category for p in self.pairings} | {self.reference}
        return [c for c in self.categories if c.name in paired]


# ------------------------------------------------------------ construction


def _validate_name(name: str) -> str:
    if _NAME_RE.match(name) is None:
        raise KnowledgeError(f"bad identifier {name!r}")
    return name


def _assign_var_letters(names: Sequence[str]) -> dict[str, str]:
    letters: dict[str, str] = {}
    used: set[str] = set()
    for name in names:
        letter = name[0].upper()
        candidate = letter
        bump = 2
        while candidate in used:
            candidate = f"{letter}{bump}"
            bump += 1
        used.add(candidate)
        letters[name] = candidate
    return letters


def build_kb(
    categories: Iterable[Category | tuple[str, Sequence[Entity]]],
    relational_facts: Iterable[RelationalFact | tuple[str, Sequence[tuple[str, str]]]] = (),
    pairing_names: Iterable[str] = (),
    reference_name: str | None = None,
) -> KnowledgeBase:
    """Assemble and validate a knowledge base.

    The numeric flag is inferred (an all-integer entity list); the
    reference defaults to the first category; pairing names listing the
    reference itself are tolerated (the reference anchors, it is not
    paired with itself).
    """
    cats: list[Category] = []
    for item in categories:
        if isinstance(item, Category):
            name, entities = item.name, item.entities
        else:
            name, entities = item[0], tuple(item[1])
        _validate_name(name)
        if any(c.name == name for c in cats):
            raise DuplicateCategory(f"category {name!r} declared twice")
        if not entities:
            raise EmptyCategory(f"category {name!r} has no entities")
        if len(set(entities)) != len(entities):
            raise KnowledgeError(f"category {name!r} has duplicate entities")
        numeric = all(isinstance(e, int) for e in entities)
        cats.append(Category(name, tuple(entities), numeric))
    if not cats:
        raise EmptyCategory("a knowledge base needs at least one category")

    relational: list[RelationalFact] = []
    for item in relational_facts:
        if isinstance(item, RelationalFact):
            predicate, pairs = item.predicate, item.pairs
        else:
            predicate, pairs = item[0], tuple(item[1])
        _validate_name(predicate)
        if not predicate.endswith("_of"):
            raise KnowledgeError(f"relational predicate {predicate!r} must end in '_of'")
        relational.append(RelationalFact(predicate, tuple(pairs)))

    reference = reference_name or cats[0].name
    if all(c.name != reference for c in cats):
        raise UnknownReference(f"reference category {reference!r} is not declared")

    letter_order = [reference] + [n for n in pairing_names if n != reference]
    letters = _assign_var_letters(letter_order)

    pairings: list[PairingPredicate] = []
    for name in pairing_names:
        if name == reference:
            continue
        if all(c.name != name for c in cats):
            raise UnknownReference(f"pairing category {name!r} is not declared")
        pairings.append(
            PairingPredicate(name, f"{name}_of", reference, (letters[reference], letters[name]))
        )
    return KnowledgeBase(tuple(cats), tuple(relational), tuple(pairings), reference)


# ---------------------------------------------------------------- matching


@dataclass(frozen=True)
class ConstantOfInterest:
    category: str
    constant: Entity


@dataclass(frozen=True)
class RuleOfInterest:
    pairing: PairingPredicate


@dataclass(frozen=True)
class RelationalValue:
    predicate: str
    value: str


MatchResult = Union[ConstantOfInterest, RuleOfInterest, RelationalValue, None]


def normalize_concept(concept: str) -> str:
    """lowercase, hyphens to underscores, PropBank sense suffix stripped."""
    c = concept.strip().lower().replace("-", "_")
    return _SENSE_SUFFIX_RE.sub("", c)


def _entity_matches(kb: KnowledgeBase, norm: str) -> list[tuple[str, Entity]]:
    hits: list[tuple[str, Entity]] = []
    for cat in kb.categories:
        for entity in cat.entities:
            ent = str(entity).lower()
            if norm == ent or norm + "s" == ent or norm == ent + "s":
                hits.append((cat.name, entity))
                break
    return hits


def _tokens(name: str) -> set[str]:
    return {t for t in name.split("_") if len(t) >= _MIN_TOKEN}


def _stem_linked(a: str, b: str) -> bool:
    prefix = 0
    for x, y in zip(a, b):
        if x != y:
            break
        prefix += 1
    return prefix >= _MIN_STEM


def match_concept(kb: KnowledgeBase, concept: str) -> MatchResult:
    """Classify one AMR concept against the knowledge base.

    Returns a :class:`ConstantOfInterest`, :class:`RuleOfInterest`,
    :class:`RelationalValue`, or ``None`` when nothing matches; raises
    :class:`AmbiguousMatch` when two categories tie at the same tier.
    """
    norm = normalize_concept(concept)
    if not norm:
        return None

    entity_hits = _entity_matches(kb, norm)
    if entity_hits:
        claimed = {cat for cat, _ in entity_hits}
        if len(claimed) > 1:
            raise AmbiguousMatch(concept, sorted(claimed))
        category, entity = entity_hits[0]
        relational = kb.relational_for(f"{category}_of")
        if relational is not None:
            return RelationalValue(relational.predicate, str(entity))
        return ConstantOfInterest(category, entity)

    # Entities that only exist as the value side of a relational fact.
    for fact in kb.relational:
        for value in fact.values():
            v = value.lower()
            if norm == v or norm + "s" == v or norm == v + "s":
                return RelationalValue(fact.predicate, value)

    concept_tokens = _tokens(norm)
    token_hits = [p for p in kb.pairings if concept_tokens & _tokens(p.category)]
    if len(token_hits) > 1:
        raise AmbiguousMatch(concept, sorted(p.category for p in token_hits))
    if token_hits:
        return RuleOfInterest(token_hits[0])

    stem_hits = [
        p
        for p in kb.pairings
        if any(
            _stem_linked(ct, pt)
            for ct in concept_tokens
            for pt in _tokens(p.category)
        )
    ]
    if len(stem_hits) > 1:
        raise AmbiguousMatch(concept, sorted(p.category for p in stem_hits))
    if stem_hits:
        return RuleOfInterest(stem_hits[0])
    return None


# ------------------------------------------------------------- persistence


def dump_kb(kb: KnowledgeBase) -> str:
    """Human-editable text form; ``load_kb`` parses it back."""
    lines = []
    for cat in kb.categories:
        lines.append(f"{cat.name}: " + ", ".join(str(e) for e in cat.entities))
    for fact in kb.relational:
        for left, right in fact.pairs:
            lines.append(f"{fact.predicate}: {left}, {right}")
    lines.append(f"reference: {kb.reference}")
    if kb.pairings:
        lines.append("pairings: " + ", ".join(p.category for p in kb.pairings))
    return "\n".join(lines) + "\n"


def load_kb(text: str, reference_override: str | None = None) -> KnowledgeBase:
    categories: list[tuple[str, list[Entity]]] = []
    relational: dict[str, list[tuple[str, str]]] = {}
    relational_order: list[str] = []
    pairing_names: list[str] = []
    reference: str | None = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise KnowledgeError(f"KB line {line_no}: expected 'name: ...'")
        name, _, rest = line.partition(":")
        name = name.strip()
        values = [v.strip() for v in rest.split(",") if v.strip()]
        if name == "reference":
            if len(values) != 1:
                raise KnowledgeError(f"KB line {line_no}: reference takes one name")
            reference = values[0]
        elif name == "pairings":
            pairing_names = values
        elif name.endswith("_of"):
            if len(values) != 2:
                raise KnowledgeError(f"KB line {line_no}: relational pair needs two values")
            if name not in relational:
                relational[name] = []
                relational_order.append(name)
            relational[name].append((values[0], values[1]))
        else:
            entities: list[Entity] = [
                int(v) if re.fullmatch(r"-?\d+", v) else v for v in values
            ]
            categories.append((name, entities))

    return build_kb(
        categories,
        [(name, relational[name]) for name in relational_order],
        pairing_names,
        reference_override or reference,
    )
