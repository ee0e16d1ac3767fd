"""Assemble the final program: knowledge-base facts, generated rules,
compiled constraints, show directive."""

from __future__ import annotations

from typing import Iterable

from .asp_core import AspProgram, Constant, Fact, Integer, Statement
from .knowledge import KnowledgeBase
from .rulegen import gen_rules


def kb_facts(kb: KnowledgeBase) -> list[Fact]:
    """Problem-instance facts: one pooled fact per category, one fact per
    relational pair, in knowledge-base order."""
    facts: list[Fact] = []
    for category in kb.categories:
        rows = tuple(
            (Integer(e),) if isinstance(e, int) else (Constant(e),)
            for e in category.entities
        )
        facts.append(Fact(category.name, rows))
    for fact in kb.relational:
        for left, right in fact.pairs:
            facts.append(Fact(fact.predicate, ((Constant(left), Constant(right)),)))
    return facts


def assemble_program(kb: KnowledgeBase, constraints: Iterable[Statement]) -> AspProgram:
    rules = gen_rules(kb)
    return AspProgram.assemble(
        kb_facts(kb),
        [*rules.choice_rules, rules.solution_rule],
        constraints,
        rules.show,
    )
