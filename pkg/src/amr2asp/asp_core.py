"""Typed AST for the ASP fragment this pipeline generates, plus emitter/parser.

The fragment covers exactly what the generated programs use: pooled facts,
normal rules, cardinality-bounded choice rules, integrity constraints with
``not`` and +/- comparisons, and ``#show`` directives.  The emitter is
bit-exact (golden files depend on it); the parser round-trips everything
the emitter can produce and tolerates surrounding whitespace and comments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Union

from .errors import ArityMismatch, AspSyntaxError, MissingShow, UnsafeVariable

_UNQUOTED_RE = re.compile(r"[a-z][a-zA-Z0-9_]*$")
_VARIABLE_RE = re.compile(r"[A-Z][A-Za-z0-9_]*$")


def needs_quotes(text: str) -> bool:
    """A constant must be quoted unless it is a lowercase identifier."""
    return _UNQUOTED_RE.match(text) is None


@dataclass(frozen=True)
class Constant:
    text: str
    quoted: bool = True

    def __post_init__(self):
        if not self.quoted and needs_quotes(self.text):
            raise ValueError(f"constant {self.text!r} requires quotes")


@dataclass(frozen=True)
class Integer:
    value: int


@dataclass(frozen=True)
class Variable:
    name: str

    def __post_init__(self):
        if _VARIABLE_RE.match(self.name) is None:
            raise ValueError(f"invalid variable name {self.name!r}")


@dataclass(frozen=True)
class Arith:
    left: "Term"
    op: str  # '+' or '-'
    right: "Term"


Term = Union[Constant, Integer, Variable, Arith]


@dataclass(frozen=True)
class Literal:
    predicate: str
    terms: tuple[Term, ...] = ()
    negated: bool = False

    def positive(self) -> "Literal":
        return Literal(self.predicate, self.terms) if self.negated else self


@dataclass(frozen=True)
class Comparison:
    left: Term
    op: str  # one of =, !=, <, >
    right: Term


BodyElement = Union[Literal, Comparison]


@dataclass(frozen=True)
class Fact:
    """Pooled fact: ``child("Kerry";"Johan").`` is rows (("Kerry",),("Johan",))."""

    predicate: str
    rows: tuple[tuple[Term, ...], ...]


@dataclass(frozen=True)
class NormalRule:
    head: Literal
    body: tuple[BodyElement, ...]


@dataclass(frozen=True)
class ChoiceElement:
    target: Literal
    conditions: tuple[BodyElement, ...] = ()


@dataclass(frozen=True)
class ChoiceRule:
    lower: int | None
    upper: int | None
    elements: tuple[ChoiceElement, ...]
    body: tuple[BodyElement, ...] = ()

    def __post_init__(self):
        if self.lower is not None and self.upper is not None and self.lower > self.upper:
            raise ValueError("choice rule lower bound exceeds upper bound")


@dataclass(frozen=True)
class IntegrityConstraint:
    body: tuple[BodyElement, ...]


@dataclass(frozen=True)
class ShowDirective:
    predicate: str
    arity: int


Statement = Union[Fact, NormalRule, ChoiceRule, IntegrityConstraint, ShowDirective]


@dataclass(frozen=True)
class AspProgram:
    statements: tuple[Statement, ...]

    @staticmethod
    def assemble(facts: Iterable[Statement], rules: Iterable[Statement],
                 constraints: Iterable[Statement], show: ShowDirective) -> "AspProgram":
        """Order statements the way the pipeline writes files: facts, rules,
        constraints, directive last."""
        return AspProgram(tuple(facts) + tuple(rules) + tuple(constraints) + (show,))


# --------------------------------------------------------------- emission


def emit_term(term: Term) -> str:
    if isinstance(term, Constant):
        return f'"{term.text}"' if term.quoted else term.text
    if isinstance(term, Integer):
        return str(term.value)
    if isinstance(term, Variable):
        return term.name
    if isinstance(term, Arith):
        return f"{emit_term(term.left)}{term.op}{emit_term(term.right)}"
    raise TypeError(f"not a term: {term!r}")


def emit_literal(lit: Literal) -> str:
    atom = lit.predicate if not lit.terms else (
        f"{lit.predicate}({','.join(emit_term(t) for t in lit.terms)})"
    )
    return f"not {atom}" if lit.negated else atom


def emit_body_element(element: BodyElement) -> str:
    if isinstance(element, Comparison):
        return f"{emit_term(element.left)} {element.op} {emit_term(element.right)}"
    return emit_literal(element)


def emit_statement(stmt: Statement) -> str:
    """One statement, no trailing newline.

    Spacing mirrors the generated programs in the reference corpus: rules
    pack ``:-`` and commas tight, integrity constraints put a space after
    ``:-`` and after body commas, choice conditions after the colon are
    comma-space separated.
    """
    if isinstance(stmt, Fact):
        rows = ";".join(",".join(emit_term(t) for t in row) for row in stmt.rows)
        return f"{stmt.predicate}({rows})."
    if isinstance(stmt, NormalRule):
        body = ",".join(emit_body_element(e) for e in stmt.body)
        return f"{emit_literal(stmt.head)}:-{body}."
    if isinstance(stmt, ChoiceRule):
        elems = []
        for el in stmt.elements:
            if el.conditions:
                conds = ", ".join(emit_body_element(c) for c in el.conditions)
                elems.append(f"{emit_literal(el.target)}:{conds}")
            else:
                elems.append(emit_literal(el.target))
        lower = "" if stmt.lower is None else str(stmt.lower)
        upper = "" if stmt.upper is None else str(stmt.upper)
        text = f"{lower}{{{';'.join(elems)}}}{upper}"
        if stmt.body:
            text += ":-" + ",".join(emit_body_element(e) for e in stmt.body)
        return text + "."
    if isinstance(stmt, IntegrityConstraint):
        return ":- " + ", ".join(emit_body_element(e) for e in stmt.body) + "."
    if isinstance(stmt, ShowDirective):
        return f"#show {stmt.predicate}/{stmt.arity}."
    raise TypeError(f"not a statement: {stmt!r}")


def emit_statements(statements: Iterable[Statement]) -> str:
    """Newline-terminated fragment text (no program-level validation)."""
    return "".join(emit_statement(s) + "\n" for s in statements)


def emit_program(program: AspProgram) -> str:
    """Full ``.lp`` text; validates safety, arity and the show directive."""
    validate_program(program)
    return emit_statements(program.statements)


# ------------------------------------------------------------- validation


def _term_variables(term: Term) -> set[str]:
    if isinstance(term, Variable):
        return {term.name}
    if isinstance(term, Arith):
        return _term_variables(term.left) | _term_variables(term.right)
    return set()


def _element_variables(element: BodyElement) -> set[str]:
    if isinstance(element, Comparison):
        return _term_variables(element.left) | _term_variables(element.right)
    out: set[str] = set()
    for t in element.terms:
        out |= _term_variables(t)
    return out


def _positive_variables(elements: Iterable[BodyElement]) -> set[str]:
    out: set[str] = set()
    for e in elements:
        if isinstance(e, Literal) and not e.negated:
            out |= _element_variables(e)
    return out


def statement_variables(stmt: Statement) -> set[str]:
    if isinstance(stmt, Fact):
        out: set[str] = set()
        for row in stmt.rows:
            for t in row:
                out |= _term_variables(t)
        return out
    if isinstance(stmt, NormalRule):
        out = _element_variables(stmt.head)
        for e in stmt.body:
            out |= _element_variables(e)
        return out
    if isinstance(stmt, ChoiceRule):
        out = set()
        for el in stmt.elements:
            out |= _element_variables(el.target)
            for c in el.conditions:
                out |= _element_variables(c)
        for e in stmt.body:
            out |= _element_variables(e)
        return out
    if isinstance(stmt, IntegrityConstraint):
        out = set()
        for e in stmt.body:
            out |= _element_variables(e)
        return out
    return set()


def check_statement_safety(stmt: Statement) -> None:
    """Every variable must be bound by a positive literal in scope.

    Choice-rule element variables may be bound either inside the element's
    own conditions or by the rule body; a bare Fact must be ground.
    """
    if isinstance(stmt, Fact):
        if statement_variables(stmt):
            raise UnsafeVariable(f"fact {stmt.predicate} contains variables")
        return
    if isinstance(stmt, NormalRule):
        bound = _positive_variables(stmt.body)
        unsafe = statement_variables(stmt) - bound
    elif isinstance(stmt, IntegrityConstraint):
        bound = _positive_variables(stmt.body)
        unsafe = statement_variables(stmt) - bound
    elif isinstance(stmt, ChoiceRule):
        body_bound = _positive_variables(stmt.body)
        body_vars: set[str] = set()
        for e in stmt.body:
            body_vars |= _element_variables(e)
        unsafe = body_vars - body_bound
        for el in stmt.elements:
            bound = body_bound | _positive_variables(el.conditions)
            elem_vars = _element_variables(el.target)
            for c in el.conditions:
                elem_vars |= _element_variables(c)
            unsafe |= elem_vars - bound
    else:
        return
    if unsafe:
        raise UnsafeVariable(
            f"unsafe variable(s) {sorted(unsafe)} in: {emit_statement(stmt)}"
        )


def _collect_arities(stmt: Statement, seen: dict[str, int]) -> None:
    def note(predicate: str, arity: int) -> None:
        prior = seen.setdefault(predicate, arity)
        if prior != arity:
            raise ArityMismatch(
                f"predicate {predicate} used with arity {arity} and {prior}"
            )

    if isinstance(stmt, Fact):
        for row in stmt.rows:
            note(stmt.predicate, len(row))
    elif isinstance(stmt, NormalRule):
        note(stmt.head.predicate, len(stmt.head.terms))
        for e in stmt.body:
            if isinstance(e, Literal):
                note(e.predicate, len(e.terms))
    elif isinstance(stmt, ChoiceRule):
        for el in stmt.elements:
            note(el.target.predicate, len(el.target.terms))
            for c in el.conditions:
                if isinstance(c, Literal):
                    note(c.predicate, len(c.terms))
        for e in stmt.body:
            if isinstance(e, Literal):
                note(e.predicate, len(e.terms))
    elif isinstance(stmt, IntegrityConstraint):
        for e in stmt.body:
            if isinstance(e, Literal):
                note(e.predicate, len(e.terms))
    elif isinstance(stmt, ShowDirective):
        note(stmt.predicate, stmt.arity)


def validate_program(program: AspProgram) -> None:
    shows = [s for s in program.statements if isinstance(s, ShowDirective)]
    if len(shows) != 1:
        raise MissingShow(f"program must contain exactly one #show, found {len(shows)}")
    if not isinstance(program.statements[-1], ShowDirective):
        raise MissingShow("#show directive must be the last statement")
    arities: dict[str, int] = {}
    for stmt in program.statements:
        check_statement_safety(stmt)
        _collect_arities(stmt, arities)


# --------------------------------------------------------------- parsing


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<quoted>"[^"\n]*")
  | (?P<number>\d+)
  | (?P<name>[a-z_][A-Za-z0-9_]*)
  | (?P<var>[A-Z][A-Za-z0-9_]*)
  | (?P<sym>:-|!=|[(){};,.:=<>+\-#/])
    """,
    re.VERBOSE,
)


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    column: int


class _Parser:
    def __init__(self, text: str):
        self.tokens = self._tokenize(text)
        self.pos = 0

    @staticmethod
    def _tokenize(text: str) -> list[_Token]:
        tokens: list[_Token] = []
        line, col = 1, 1
        i = 0
        while i < len(text):
            m = _TOKEN_RE.match(text, i)
            if m is None:
                raise AspSyntaxError(line, col, f"unexpected character {text[i]!r}")
            kind = m.lastgroup or ""
            value = m.group()
            if kind not in ("ws", "comment"):
                tokens.append(_Token(kind, value, line, col))
            newlines = value.count("\n")
            if newlines:
                line += newlines
                col = len(value) - value.rfind("\n")
            else:
                col += len(value)
            i = m.end()
        tokens.append(_Token("eof", "", line, col))
        return tokens

    # -- token helpers

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise AspSyntaxError(tok.line, tok.column, f"expected {want!r}, got {tok.text!r}")
        return self.next()

    def at_sym(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "sym" and tok.text == text

    def eat_sym(self, text: str) -> bool:
        if self.at_sym(text):
            self.next()
            return True
        return False

    def error(self, message: str) -> AspSyntaxError:
        tok = self.peek()
        return AspSyntaxError(tok.line, tok.column, message)

    # -- grammar

    def parse_statements(self) -> list[Statement]:
        out = []
        while self.peek().kind != "eof":
            out.append(self.parse_statement())
        return out

    def parse_statement(self) -> Statement:
        if self.eat_sym("#"):
            name = self.expect("name")
            if name.text != "show":
                raise AspSyntaxError(name.line, name.column, f"unknown directive #{name.text}")
            pred = self.expect("name").text
            self.expect("sym", "/")
            arity = int(self.expect("number").text)
            self.expect("sym", ".")
            return ShowDirective(pred, arity)

        if self.at_sym(":-"):
            self.next()
            body = self.parse_body()
            self.expect("sym", ".")
            return IntegrityConstraint(tuple(body))

        if self.peek().kind == "number" or self.at_sym("{"):
            return self.parse_choice()

        head_pred = self.expect("name").text
        rows = self.parse_pooled_args() if self.at_sym("(") else [[]]
        if self.eat_sym(":-"):
            if len(rows) != 1:
                raise self.error("pooled terms are only allowed in facts")
            head = Literal(head_pred, tuple(rows[0]))
            body = self.parse_body()
            self.expect("sym", ".")
            return NormalRule(head, tuple(body))
        self.expect("sym", ".")
        return Fact(head_pred, tuple(tuple(row) for row in rows))

    def parse_choice(self) -> ChoiceRule:
        lower = None
        if self.peek().kind == "number":
            lower = int(self.next().text)
        self.expect("sym", "{")
        elements = [self.parse_choice_element()]
        while self.eat_sym(";") or self.eat_sym(","):
            elements.append(self.parse_choice_element())
        self.expect("sym", "}")
        upper = None
        if self.peek().kind == "number":
            upper = int(self.next().text)
        body: list[BodyElement] = []
        if self.eat_sym(":-"):
            body = self.parse_body()
        self.expect("sym", ".")
        return ChoiceRule(lower, upper, tuple(elements), tuple(body))

    def parse_choice_element(self) -> ChoiceElement:
        target = self.parse_literal()
        conditions: list[BodyElement] = []
        if self.eat_sym(":"):
            conditions.append(self.parse_body_element())
            while self.at_sym(","):
                self.next()
                conditions.append(self.parse_body_element())
        return ChoiceElement(target, tuple(conditions))

    def parse_body(self) -> list[BodyElement]:
        out = [self.parse_body_element()]
        while self.eat_sym(","):
            out.append(self.parse_body_element())
        return out

    def parse_body_element(self) -> BodyElement:
        tok = self.peek()
        if tok.kind == "name" and tok.text == "not":
            self.next()
            lit = self.parse_literal()
            return Literal(lit.predicate, lit.terms, negated=True)
        if tok.kind == "name":
            # Either an atom or an unquoted-constant comparison; atoms win.
            nxt = self.tokens[self.pos + 1]
            if not (nxt.kind == "sym" and nxt.text in ("=", "!=", "<", ">", "+", "-")):
                return self.parse_literal()
        left = self.parse_term()
        op_tok = self.peek()
        if op_tok.kind == "sym" and op_tok.text in ("=", "!=", "<", ">"):
            self.next()
            right = self.parse_term()
            return Comparison(left, op_tok.text, right)
        raise self.error("expected comparison operator")

    def parse_literal(self) -> Literal:
        pred = self.expect("name").text
        if not self.at_sym("("):
            return Literal(pred)
        rows = self.parse_pooled_args()
        if len(rows) != 1:
            raise self.error("pooled terms are only allowed in facts")
        return Literal(pred, tuple(rows[0]))

    def parse_pooled_args(self) -> list[list[Term]]:
        self.expect("sym", "(")
        rows = [self.parse_term_vector()]
        while self.eat_sym(";"):
            rows.append(self.parse_term_vector())
        self.expect("sym", ")")
        return rows

    def parse_term_vector(self) -> list[Term]:
        terms = [self.parse_term()]
        while self.eat_sym(","):
            terms.append(self.parse_term())
        return terms

    def parse_term(self) -> Term:
        term = self.parse_simple_term()
        while True:
            tok = self.peek()
            if tok.kind == "sym" and tok.text in ("+", "-"):
                self.next()
                term = Arith(term, tok.text, self.parse_simple_term())
            else:
                return term

    def parse_simple_term(self) -> Term:
        tok = self.next()
        if tok.kind == "quoted":
            return Constant(tok.text[1:-1], quoted=True)
        if tok.kind == "number":
            return Integer(int(tok.text))
        if tok.kind == "var":
            return Variable(tok.text)
        if tok.kind == "name":
            return Constant(tok.text, quoted=False)
        raise AspSyntaxError(tok.line, tok.column, f"expected term, got {tok.text!r}")


def parse_fragment(text: str) -> list[Statement]:
    """Parse fragment text into statements; raises :class:`AspSyntaxError`."""
    return _Parser(text).parse_statements()


def parse_program(text: str) -> AspProgram:
    program = AspProgram(tuple(parse_fragment(text)))
    validate_program(program)
    return program


def normalize_tokens(text: str) -> list[str]:
    """Token stream for whitespace-insensitive comparisons of ASP text."""
    return re.findall(r'"[^"]*"|[A-Za-z0-9_]+|:-|!=|[^\sA-Za-z0-9_"]', text)
