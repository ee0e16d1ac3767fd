"""Pydantic request/response models for the HTTP service.

These are wire-format mirrors of the core dataclasses; conversion helpers
keep the core package free of pydantic.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field

from ..knowledge import KnowledgeBase, RelationalFact, build_kb
from ..penman import AmrEdge, AmrGraph, AmrNode

Entity = Union[int, str]
SolutionRow = list[Entity]


class NodeModel(BaseModel):
    id: str
    concept: str
    attributes: list[tuple[str, str]] = Field(default_factory=list)


class EdgeModel(BaseModel):
    source: str
    role: str
    target: str


class GraphModel(BaseModel):
    root: str
    nodes: list[NodeModel]
    edges: list[EdgeModel]
    sentence: Optional[str] = None

    @staticmethod
    def from_graph(graph: AmrGraph) -> "GraphModel":
        return GraphModel(
            root=graph.root,
            nodes=[
                NodeModel(id=n.id, concept=n.concept, attributes=list(n.attributes))
                for n in graph.nodes.values()
            ],
            edges=[EdgeModel(source=e.source, role=e.role, target=e.target) for e in graph.edges],
            sentence=graph.sentence,
        )

    def to_graph(self) -> AmrGraph:
        return AmrGraph(
            root=self.root,
            nodes={
                n.id: AmrNode(n.id, n.concept, tuple((r, v) for r, v in n.attributes))
                for n in self.nodes
            },
            edges=tuple(AmrEdge(e.source, e.role, e.target) for e in self.edges),
            sentence=self.sentence,
        )


class CategoryModel(BaseModel):
    name: str
    entities: list[Entity]
    numeric: bool = False


class RelationalModel(BaseModel):
    predicate: str
    pairs: list[tuple[str, str]]


class KbModel(BaseModel):
    categories: list[CategoryModel]
    relational: list[RelationalModel] = Field(default_factory=list)
    pairings: list[str] = Field(default_factory=list)
    reference: str

    @staticmethod
    def from_kb(kb: KnowledgeBase) -> "KbModel":
        return KbModel(
            categories=[
                CategoryModel(name=c.name, entities=list(c.entities), numeric=c.numeric)
                for c in kb.categories
            ],
            relational=[
                RelationalModel(predicate=r.predicate, pairs=list(r.pairs))
                for r in kb.relational
            ],
            pairings=[p.category for p in kb.pairings],
            reference=kb.reference,
        )

    def to_kb(self) -> KnowledgeBase:
        return build_kb(
            [(c.name, c.entities) for c in self.categories],
            [RelationalFact(r.predicate, tuple(r.pairs)) for r in self.relational],
            self.pairings,
            self.reference,
        )


class TranscriptEntryModel(BaseModel):
    prompt: str
    response: str


# ------------------------------------------------------------- requests


class ParseRequest(BaseModel):
    text: str


class ParseResponse(BaseModel):
    graphs: list[GraphModel]


class EmitRequest(BaseModel):
    graph: GraphModel


class EmitResponse(BaseModel):
    text: str


class PipelineRequest(BaseModel):
    description: str
    transcript: Optional[list[TranscriptEntryModel]] = None
    record: bool = False
    reference: Optional[str] = None
    endpoint: Optional[str] = None
    model: Optional[str] = None


class PipelineResponse(BaseModel):
    kb: KbModel
    kb_text: str
    sentences: list[str]
    stage_responses: dict[str, str]
    transcript: list[TranscriptEntryModel]


class RulesRequest(BaseModel):
    kb: Optional[KbModel] = None
    kb_text: Optional[str] = None
    reference: Optional[str] = None


class RulesResponse(BaseModel):
    rules_lp: str


class ConstraintItem(BaseModel):
    penman: str


class CompiledItem(BaseModel):
    sentence: Optional[str]
    form: Literal["integrity", "choice"]
    text: str


class SkippedItem(BaseModel):
    sentence: Optional[str]
    reason: str


class ConstraintsRequest(BaseModel):
    kb: Optional[KbModel] = None
    kb_text: Optional[str] = None
    reference: Optional[str] = None
    graphs: list[ConstraintItem]


class ConstraintsResponse(BaseModel):
    constraints_lp: str
    compiled: list[CompiledItem]
    skipped: list[SkippedItem]


class CompileRequest(BaseModel):
    kb: Optional[KbModel] = None
    kb_text: Optional[str] = None
    reference: Optional[str] = None
    constraints_lp: str


class CompileResponse(BaseModel):
    program_lp: str


class SolveStatsModel(BaseModel):
    nodes: int = 0
    models: int = 0
    elapsed: float = 0.0


class TableModel(BaseModel):
    rows: list[SolutionRow]


class SolveRequest(BaseModel):
    program_lp: str
    solver: Literal["internal", "clingo", "both"] = "internal"
    clingo_path: Optional[str] = None
    timeout: float = 60.0


class SolveResponse(BaseModel):
    status: Literal["unique", "multiple", "unsat"]
    tables: list[TableModel]
    stats: SolveStatsModel
    clingo_ran: bool = False
    agreement: Optional[bool] = None
    disagreement: Optional[str] = None


class E2ERequest(BaseModel):
    description: str
    transcript: Optional[list[TranscriptEntryModel]] = None
    record: bool = False
    reference: Optional[str] = None
    endpoint: Optional[str] = None
    model: Optional[str] = None
    graphs: list[ConstraintItem]
    solver: Literal["internal", "clingo", "both"] = "internal"
    clingo_path: Optional[str] = None
    timeout: float = 60.0


class E2EResponse(BaseModel):
    kb: KbModel
    kb_text: str
    sentences: list[str]
    rules_lp: str
    constraints_lp: str
    program_lp: str
    compiled: list[CompiledItem]
    skipped: list[SkippedItem]
    solve: SolveResponse
    transcript: list[TranscriptEntryModel]


class ErrorDetail(BaseModel):
    error: str
    message: str
    stage: Optional[str] = None
