from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import pytest

from amr2asp.assemble import assemble_program
from amr2asp.asp_core import AspProgram, Statement
from amr2asp.constraintgen import CompiledConstraint, compile_corpus
from amr2asp.fixtures import amr_dir, description_path, puzzle_dir, transcript_path
from amr2asp.knowledge import KnowledgeBase
from amr2asp.penman import AmrGraph, parse_penman
from amr2asp.prompt_pipeline import ReplayClient, Transcript, run_pipeline

GOLDEN = Path(__file__).parent / "golden"


@dataclass
class Puzzle:
    name: str
    description: str
    kb: KnowledgeBase
    sentences: list[str]
    graphs: list[AmrGraph]
    compiled: list[CompiledConstraint]
    program: AspProgram

    @property
    def constraint_statements(self) -> list[Statement]:
        return [c.statement for c in self.compiled]


def _build(name: str, reference: str | None) -> Puzzle:
    description = description_path(name).read_text(encoding="utf-8").strip()
    transcript = Transcript.loads(transcript_path(name).read_text(encoding="utf-8"))
    result = run_pipeline(description, ReplayClient(transcript), reference_override=reference)
    graphs = [
        parse_penman(path.read_text(encoding="utf-8"))
        for path in sorted(amr_dir(name).iterdir())
    ]
    compiled, skipped = compile_corpus(graphs, result.kb)
    assert not skipped, f"{name}: unexpected skipped sentences {skipped}"
    program = assemble_program(result.kb, [c.statement for c in compiled])
    return Puzzle(name, description, result.kb, result.sentences, graphs, compiled, program)


@pytest.fixture(scope="session")
def zoo() -> Puzzle:
    return _build("zoo", None)


@pytest.fixture(scope="session")
def einstein() -> Puzzle:
    return _build("einstein", "house_color")


@pytest.fixture(scope="session")
def faulty_johan() -> AmrGraph:
    path = puzzle_dir("zoo") / "amr_faulty" / "05.penman"
    return parse_penman(path.read_text(encoding="utf-8"))


def golden_text(relative: str) -> str:
    return (GOLDEN / relative).read_text(encoding="utf-8")
