"""amr2asp: compile natural-language logic puzzles into ASP programs.

LLM prompt stages extract the problem facts and simplify the constraint
sentences; AMR graphs of the simplified sentences are compiled
deterministically into choice rules and integrity constraints; the result
solves with the built-in solver or external Clingo.
"""

from .asp_core import AspProgram, emit_program, emit_statements, parse_fragment, parse_program
from .constraintgen import compile_corpus, compile_graph
from .knowledge import KnowledgeBase, build_kb, dump_kb, load_kb, match_concept
from .penman import AmrGraph, concepts_of, emit_penman, parse_penman, parse_penman_many, polarity_scope
from .prompt_pipeline import Transcript, render, run_pipeline
from .rulegen import gen_rules
from .solver import SolveReport, compare, solve_clingo, solve_internal

__version__ = "0.1.0"

__all__ = [
    "AmrGraph",
    "AspProgram",
    "KnowledgeBase",
    "SolveReport",
    "Transcript",
    "build_kb",
    "compare",
    "compile_corpus",
    "compile_graph",
    "concepts_of",
    "dump_kb",
    "emit_penman",
    "emit_program",
    "emit_statements",
    "gen_rules",
    "load_kb",
    "match_concept",
    "parse_fragment",
    "parse_penman",
    "parse_penman_many",
    "parse_program",
    "polarity_scope",
    "render",
    "run_pipeline",
    "solve_clingo",
    "solve_internal",
]
