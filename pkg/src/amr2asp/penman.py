"""PENMAN-notation AMR graphs: parser, emitter, and the query surface the
constraint compiler needs (preorder concepts, negation scope, depths).

Graphs are immutable after parsing and safe to share across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .errors import DanglingReference, DuplicateVariable, EmptyInput, PenmanError, UnbalancedParens

_INT_RE = re.compile(r"-?\d+$")
# Node ids in this corpus are a letter run plus optional digits (g, h2, o3).
_VARIABLE_SHAPED_RE = re.compile(r"[a-z][a-z]?[0-9]*$")


@dataclass(frozen=True)
class AmrNode:
    id: str
    concept: str
    attributes: tuple[tuple[str, str], ...] = ()

    def attribute(self, role: str) -> str | None:
        for r, value in self.attributes:
            if r == role:
                return value
        return None


@dataclass(frozen=True)
class AmrEdge:
    source: str
    role: str
    target: str


@dataclass(frozen=True)
class AmrGraph:
    root: str
    nodes: dict[str, AmrNode]
    edges: tuple[AmrEdge, ...]
    sentence: str | None = None

    def node(self, node_id: str) -> AmrNode:
        return self.nodes[node_id]

    def edges_from(self, node_id: str) -> list[AmrEdge]:
        return [e for e in self.edges if e.source == node_id]

    def preorder(self) -> list[tuple[str, int]]:
        """Defined nodes in depth-first preorder as (node-id, depth).

        Each node appears once, at its first visit; re-reference edges do
        not revisit.
        """
        out: list[tuple[str, int]] = []
        seen: set[str] = set()

        def walk(node_id: str, depth: int) -> None:
            if node_id in seen:
                return
            seen.add(node_id)
            out.append((node_id, depth))
            for edge in self.edges_from(node_id):
                walk(edge.target, depth + 1)

        walk(self.root, 0)
        return out

    def depths(self) -> dict[str, int]:
        return dict(self.preorder())

    def descendants(self, node_id: str) -> set[str]:
        """All nodes reachable from node_id, itself included."""
        reached = {node_id}
        frontier = [node_id]
        while frontier:
            current = frontier.pop()
            for edge in self.edges_from(current):
                if edge.target not in reached:
                    reached.add(edge.target)
                    frontier.append(edge.target)
        return reached

    def with_sentence(self, sentence: str | None) -> "AmrGraph":
        return replace(self, sentence=sentence)


def structurally_equal(a: AmrGraph, b: AmrGraph) -> bool:
    """Equality up to edge ordering; metadata is ignored."""
    return (
        a.root == b.root
        and a.nodes == b.nodes
        and sorted(a.edges, key=lambda e: (e.source, e.role, e.target))
        == sorted(b.edges, key=lambda e: (e.source, e.role, e.target))
    )


# ---------------------------------------------------------------- parsing


_PENMAN_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<slash>/)
  | (?P<role>:[A-Za-z][A-Za-z0-9-]*)
  | (?P<quoted>"[^"\n]*")
  | (?P<token>[^\s()/:]+)
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    i = 0
    while i < len(text):
        m = _PENMAN_TOKEN_RE.match(text, i)
        if m is None:
            raise PenmanError(f"unexpected character {text[i]!r}")
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup or "", m.group()))
        i = m.end()
    return tokens


def _defined_variables(tokens: list[tuple[str, str]]) -> set[str]:
    defined: set[str] = set()
    for idx, (kind, text) in enumerate(tokens):
        if kind == "lparen":
            if idx + 2 >= len(tokens):
                raise UnbalancedParens("graph ends inside a node definition")
            var_kind, var_text = tokens[idx + 1]
            slash_kind, _ = tokens[idx + 2]
            if var_kind != "token" or slash_kind != "slash":
                raise PenmanError("expected '( variable / concept'")
            if var_text in defined:
                raise DuplicateVariable(f"node id {var_text!r} defined twice")
            defined.add(var_text)
    return defined


class _GraphBuilder:
    def __init__(self, tokens: list[tuple[str, str]]):
        self.tokens = tokens
        self.pos = 0
        self.defined = _defined_variables(tokens)
        self.nodes: dict[str, AmrNode] = {}
        self.attrs: dict[str, list[tuple[str, str]]] = {}
        self.edges: list[AmrEdge] = []

    def peek(self) -> tuple[str, str]:
        if self.pos >= len(self.tokens):
            return ("eof", "")
        return self.tokens[self.pos]

    def next(self) -> tuple[str, str]:
        tok = self.peek()
        self.pos += 1
        return tok

    def parse_node(self) -> str:
        kind, _ = self.next()
        if kind != "lparen":
            raise PenmanError("expected '('")
        var_kind, var = self.next()
        slash_kind, _ = self.next()
        if var_kind != "token" or slash_kind != "slash":
            raise PenmanError("expected 'variable / concept'")
        concept_kind, concept = self.next()
        if concept_kind != "token" or not concept:
            raise PenmanError(f"node {var!r} has no concept")
        self.attrs[var] = []
        while True:
            kind, text = self.peek()
            if kind == "rparen":
                self.next()
                break
            if kind == "eof":
                raise UnbalancedParens(f"node {var!r} is never closed")
            if kind != "role":
                raise PenmanError(f"expected role or ')', got {text!r}")
            self.next()
            role = text
            self.parse_target(var, role)
        node = AmrNode(var, concept, tuple(self.attrs[var]))
        if node.attribute(":polarity") not in (None, "-"):
            raise PenmanError(f"node {var!r}: :polarity value must be '-'")
        self.nodes[var] = node
        return var

    def parse_target(self, source: str, role: str) -> None:
        kind, text = self.peek()
        if kind == "lparen":
            child = self.parse_node()
            self.edges.append(AmrEdge(source, role, child))
            return
        if kind == "quoted":
            self.next()
            self.attrs[source].append((role, text[1:-1]))
            return
        if kind == "token":
            self.next()
            if text in self.defined:
                self.edges.append(AmrEdge(source, role, text))
            elif _VARIABLE_SHAPED_RE.match(text) and not _INT_RE.match(text):
                raise DanglingReference(
                    f"{role} {text}: {text!r} looks like a node id but is never defined"
                )
            else:
                self.attrs[source].append((role, text))
            return
        raise PenmanError(f"expected node, constant, or reference after {role}")


def _split_documents(text: str) -> list[tuple[str | None, str]]:
    """Split file text into (sentence, graph-text) chunks.

    Graphs are separated by blank lines; ``# ::snt`` comment lines attach
    to the following graph, other ``#`` lines are ignored.
    """
    chunks: list[tuple[str | None, str]] = []
    sentence: str | None = None
    body: list[str] = []
    depth = 0

    def flush() -> None:
        nonlocal sentence, body
        if body:
            chunks.append((sentence, "\n".join(body)))
        sentence, body = None, []

    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("#"):
            if stripped.startswith("# ::snt"):
                sentence = stripped[len("# ::snt"):].strip()
            continue
        if not stripped:
            if depth == 0:
                flush()
            continue
        body.append(line)
        depth += line.count("(") - line.count(")")
    flush()
    return chunks


def _parse_single(sentence: str | None, body: str) -> AmrGraph:
    tokens = _tokenize(body)
    builder = _GraphBuilder(tokens)
    root = builder.parse_node()
    if builder.peek()[0] != "eof":
        kind, text = builder.peek()
        if kind == "rparen":
            raise UnbalancedParens("extra ')' after graph")
        raise PenmanError(f"trailing content after graph: {text!r}")
    graph = AmrGraph(root, builder.nodes, tuple(builder.edges), sentence)
    unreachable = set(graph.nodes) - graph.descendants(root)
    if unreachable:
        raise PenmanError(f"nodes unreachable from root: {sorted(unreachable)}")
    return graph


def parse_penman(text: str) -> AmrGraph:
    """Parse exactly one graph (optionally preceded by ``# ::snt`` lines)."""
    chunks = _split_documents(text)
    if not chunks:
        raise EmptyInput("no PENMAN graph in input")
    if len(chunks) > 1:
        raise PenmanError(f"expected one graph, found {len(chunks)}")
    return _parse_single(*chunks[0])


def parse_penman_many(text: str) -> list[AmrGraph]:
    """Parse a file of graphs separated by blank lines."""
    chunks = _split_documents(text)
    if not chunks:
        raise EmptyInput("no PENMAN graph in input")
    return [_parse_single(sentence, body) for sentence, body in chunks]


# ---------------------------------------------------------------- queries


def concepts_of(graph: AmrGraph) -> list[tuple[str, str]]:
    """(node-id, concept) in depth-first preorder, one entry per node."""
    return [(node_id, graph.nodes[node_id].concept) for node_id, _ in graph.preorder()]


def polarity_scope(graph: AmrGraph) -> set[str]:
    """Ids of all nodes negated by some ``:polarity -`` tag: every bearing
    node together with everything reachable from it."""
    scope: set[str] = set()
    for node in graph.nodes.values():
        if node.attribute(":polarity") == "-":
            scope |= graph.descendants(node.id)
    return scope


# --------------------------------------------------------------- emission


def _emit_attribute_value(value: str) -> str:
    if _INT_RE.match(value) or value in ("-", "+"):
        return value
    return f'"{value}"'


def emit_penman(graph: AmrGraph) -> str:
    """Canonical text: 4-space indents, attributes before edges, nodes
    defined at first visit and re-referenced afterwards."""
    seen: set[str] = set()

    def emit_node(node_id: str, depth: int) -> str:
        seen.add(node_id)
        node = graph.nodes[node_id]
        indent = "    " * (depth + 1)
        parts = [f"({node.id} / {node.concept}"]
        for role, value in node.attributes:
            parts.append(f"\n{indent}{role} {_emit_attribute_value(value)}")
        for edge in graph.edges_from(node_id):
            if edge.target in seen:
                parts.append(f"\n{indent}{edge.role} {edge.target}")
            else:
                parts.append(f"\n{indent}{edge.role} {emit_node(edge.target, depth + 1)}")
        parts.append(")")
        return "".join(parts)

    text = emit_node(graph.root, 0)
    if graph.sentence is not None:
        return f"# ::snt {graph.sentence}\n{text}\n"
    return text + "\n"
