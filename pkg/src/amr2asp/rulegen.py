"""Deterministic rule generation from the knowledge base: two bijection
choice rules per pairing, the combining solution rule, and the show
directive."""

from __future__ import annotations

from dataclasses import dataclass

from .asp_core import (
    ChoiceElement,
    ChoiceRule,
    Literal,
    NormalRule,
    ShowDirective,
    Statement,
    Variable,
)
from .errors import NoPairings
from .knowledge import KnowledgeBase


@dataclass(frozen=True)
class GeneratedRules:
    choice_rules: tuple[ChoiceRule, ...]
    solution_rule: NormalRule
    show: ShowDirective

    def statements(self) -> list[Statement]:
        return [*self.choice_rules, self.solution_rule, self.show]


def gen_choice_rules(kb: KnowledgeBase) -> list[ChoiceRule]:
    """For each pairing P over reference R emit both directions:

        1{P_of(Rv,Pv):P(Pv)}1:-R(Rv).
        1{P_of(Rv,Pv):R(Rv)}1:-P(Pv).
    """
    if not kb.pairings:
        raise NoPairings("knowledge base declares no one-to-one pairings")
    rules = []
    for pairing in kb.pairings:
        ref_var = Variable(pairing.var_letters[0])
        cat_var = Variable(pairing.var_letters[1])
        target = Literal(pairing.rule_name, (ref_var, cat_var))
        rules.append(
            ChoiceRule(
                1, 1,
                (ChoiceElement(target, (Literal(pairing.category, (cat_var,)),)),),
                (Literal(pairing.reference, (ref_var,)),),
            )
        )
        rules.append(
            ChoiceRule(
                1, 1,
                (ChoiceElement(target, (Literal(pairing.reference, (ref_var,)),)),),
                (Literal(pairing.category, (cat_var,)),),
            )
        )
    return rules


def gen_solution_rule(kb: KnowledgeBase) -> tuple[NormalRule, ShowDirective]:
    """Combine every pairing into one solution predicate.

    Head variables are the full capitalized category names, ordered as the
    categories were declared (reference included); the body conjoins every
    pairing rule anchored on the reference variable.
    """
    if not kb.pairings:
        raise NoPairings("knowledge base declares no one-to-one pairings")
    ref_var = Variable(kb.reference.capitalize())
    head_terms = tuple(
        Variable(cat.name.capitalize()) for cat in kb.solution_categories()
    )
    body = tuple(
        Literal(p.rule_name, (ref_var, Variable(p.category.capitalize())))
        for p in kb.pairings
    )
    head = Literal("solution", head_terms)
    return NormalRule(head, body), ShowDirective("solution", len(head_terms))


def gen_rules(kb: KnowledgeBase) -> GeneratedRules:
    solution_rule, show = gen_solution_rule(kb)
    return GeneratedRules(tuple(gen_choice_rules(kb)), solution_rule, show)
