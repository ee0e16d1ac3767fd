"""Answer sets for the generated program fragment, two ways: an internal
backtracking solver (independent oracle, no grounding) and an adapter that
shells out to a Clingo binary.  Reports from both sides are comparable.

The internal solver accepts exactly the fragment the pipeline emits:
pooled facts, relational facts, bijection choice-rule pairs, one solution
rule, integrity constraints (with ``not`` and +/- comparisons), and
bodyless cardinality choice rules.  Anything else is rejected rather than
silently mis-solved.
"""

from __future__ import annotations

import re
import shutil
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

from .asp_core import (
    Arith,
    AspProgram,
    BodyElement,
    ChoiceRule,
    Comparison,
    Constant,
    Fact,
    Integer,
    IntegrityConstraint,
    Literal,
    NormalRule,
    ShowDirective,
    Statement,
    Term,
    Variable,
    emit_program,
    parse_fragment,
)
from .errors import BinaryNotFound, ClingoError, SolveTimeout, UnsupportedStatement

Value = Union[str, int]
Row = tuple[Value, ...]

TRUE, FALSE, UNKNOWN = 1, 0, -1


@dataclass(frozen=True)
class SolutionTable:
    """One stable model projected onto the solution predicate: one row per
    reference entity."""

    rows: tuple[Row, ...]
    complete: bool = True

    def key(self) -> frozenset[Row]:
        return frozenset(self.rows)


@dataclass
class SolveStats:
    nodes: int = 0
    models: int = 0
    elapsed: float = 0.0


@dataclass
class SolveReport:
    status: str  # 'unique' | 'multiple' | 'unsat'
    tables: list[SolutionTable]
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def model_count(self) -> int:
        return len(self.tables)


@dataclass(frozen=True)
class Agreement:
    pass


@dataclass(frozen=True)
class Disagreement:
    only_in_a: tuple[frozenset[Row], ...]
    only_in_b: tuple[frozenset[Row], ...]


def _status_for(tables: Sequence[SolutionTable]) -> str:
    if not tables:
        return "unsat"
    return "unique" if len(tables) == 1 else "multiple"


def compare(report_a: SolveReport, report_b: SolveReport) -> Agreement | Disagreement:
    """Order-insensitive comparison of the two reports' model sets."""
    keys_a = {t.key() for t in report_a.tables}
    keys_b = {t.key() for t in report_b.tables}
    if keys_a == keys_b:
        return Agreement()
    return Disagreement(tuple(keys_a - keys_b), tuple(keys_b - keys_a))


def validate_bijection(table: SolutionTable) -> None:
    """Every column of a table must use each value exactly once."""
    if not table.rows:
        return
    width = len(table.rows[0])
    for column in range(width):
        values = [row[column] for row in table.rows]
        if len(set(values)) != len(values):
            raise UnsupportedStatement(
                f"table column {column} repeats a value: not a bijection"
            )


# ------------------------------------------------------------ program model


@dataclass
class _Pairing:
    predicate: str
    ref_pred: str
    val_pred: str
    directions: int = 0


@dataclass
class _Check:
    """One integrity constraint or cardinality rule, precompiled.

    ``schedule[i]`` holds the body elements whose variables are all bound
    once the first ``i`` variables have values, so grounding can prune as
    soon as any element is definitely false.
    """

    kind: str  # 'integrity' | 'cardinality'
    elements: tuple[BodyElement, ...]
    variables: tuple[str, ...]
    domains: tuple[tuple[Value, ...], ...]
    schedule: tuple[tuple[BodyElement, ...], ...] = ()
    lower: int = 0
    upper: int | None = None
    touches: frozenset[str] = frozenset()
    source: str = ""


def _term_value(term: Term) -> Value:
    if isinstance(term, Constant):
        return term.text
    if isinstance(term, Integer):
        return term.value
    raise UnsupportedStatement(f"expected ground term, got {term!r}")


class ProgramModel:
    """Structural interpretation of a generated program."""

    def __init__(self, statements: Iterable[Statement]):
        self.domains: dict[str, list[Value]] = {}
        self.relational: dict[str, set[Row]] = {}
        self.relational_rows: dict[str, list[Row]] = {}
        self.pairings: list[_Pairing] = []
        self._pairing_by_pred: dict[str, _Pairing] = {}
        self.solution_rule: NormalRule | None = None
        self.show: ShowDirective | None = None
        raw_checks: list[tuple[str, ChoiceRule | IntegrityConstraint]] = []

        for stmt in statements:
            if isinstance(stmt, Fact):
                self._add_fact(stmt)
            elif isinstance(stmt, ShowDirective):
                if self.show is not None:
                    raise UnsupportedStatement("multiple #show directives")
                self.show = stmt
            elif isinstance(stmt, NormalRule):
                if self.solution_rule is not None:
                    raise UnsupportedStatement("multiple solution rules")
                self.solution_rule = stmt
            elif isinstance(stmt, ChoiceRule):
                if stmt.body:
                    self._add_bijection_direction(stmt)
                else:
                    raw_checks.append(("cardinality", stmt))
            elif isinstance(stmt, IntegrityConstraint):
                raw_checks.append(("integrity", stmt))
            else:
                raise UnsupportedStatement(f"statement outside fragment: {stmt!r}")

        for pairing in self.pairings:
            if pairing.directions != 2:
                raise UnsupportedStatement(
                    f"pairing {pairing.predicate} needs both bijection choice rules"
                )
            for pred in (pairing.ref_pred, pairing.val_pred):
                if pred not in self.domains:
                    raise UnsupportedStatement(f"no facts for domain {pred!r}")
        refs = {p.ref_pred for p in self.pairings}
        if len(refs) > 1:
            raise UnsupportedStatement(f"pairings disagree on the reference: {sorted(refs)}")
        self.ref_pred = next(iter(refs)) if refs else None
        if self.solution_rule is not None:
            self._solution_extractor = self._compile_solution(self.solution_rule)
        self.checks = [self._compile_check(kind, stmt) for kind, stmt in raw_checks]

    # -- construction helpers

    def _add_fact(self, fact: Fact) -> None:
        arities = {len(row) for row in fact.rows}
        if arities == {1}:
            domain = self.domains.setdefault(fact.predicate, [])
            for row in fact.rows:
                value = _term_value(row[0])
                if value not in domain:
                    domain.append(value)
        elif arities == {2}:
            rows = [tuple(_term_value(t) for t in row) for row in fact.rows]
            self.relational.setdefault(fact.predicate, set()).update(rows)
            self.relational_rows.setdefault(fact.predicate, []).extend(rows)
        else:
            raise UnsupportedStatement(f"fact {fact.predicate} has unsupported arity")

    def _add_bijection_direction(self, stmt: ChoiceRule) -> None:
        ok = (
            stmt.lower == 1
            and stmt.upper == 1
            and len(stmt.elements) == 1
            and len(stmt.elements[0].conditions) == 1
            and len(stmt.body) == 1
        )
        if not ok:
            raise UnsupportedStatement(f"choice rule outside fragment: {stmt!r}")
        element = stmt.elements[0]
        cond = element.conditions[0]
        body = stmt.body[0]
        target = element.target
        if (
            not isinstance(cond, Literal)
            or not isinstance(body, Literal)
            or cond.negated
            or body.negated
            or len(target.terms) != 2
            or len(cond.terms) != 1
            or len(body.terms) != 1
        ):
            raise UnsupportedStatement(f"choice rule outside fragment: {stmt!r}")
        slot_vars = target.terms
        cond_var, body_var = cond.terms[0], body.terms[0]
        if not all(isinstance(v, Variable) for v in (*slot_vars, cond_var, body_var)):
            raise UnsupportedStatement(f"choice rule outside fragment: {stmt!r}")
        if {cond_var, body_var} != set(slot_vars):
            raise UnsupportedStatement(f"choice rule variables do not line up: {stmt!r}")
        by_var = {cond_var: cond.predicate, body_var: body.predicate}
        ref_pred = by_var[slot_vars[0]]
        val_pred = by_var[slot_vars[1]]
        pairing = self._pairing_by_pred.get(target.predicate)
        if pairing is None:
            pairing = _Pairing(target.predicate, ref_pred, val_pred)
            self.pairings.append(pairing)
            self._pairing_by_pred[target.predicate] = pairing
        elif (pairing.ref_pred, pairing.val_pred) != (ref_pred, val_pred):
            raise UnsupportedStatement(
                f"bijection directions disagree for {target.predicate}"
            )
        pairing.directions += 1

    def _compile_solution(self, rule: NormalRule):
        head = rule.head
        if any(not isinstance(t, Variable) for t in head.terms):
            raise UnsupportedStatement("solution rule head must be all variables")
        ref_vars = set()
        slot_of: dict[str, tuple[str, int]] = {}
        for element in rule.body:
            if not isinstance(element, Literal) or element.negated:
                raise UnsupportedStatement("solution rule body must be positive literals")
            if element.predicate not in self._pairing_by_pred or len(element.terms) != 2:
                raise UnsupportedStatement(
                    f"solution rule uses non-pairing literal {element.predicate!r}"
                )
            ref_term, val_term = element.terms
            if not isinstance(ref_term, Variable) or not isinstance(val_term, Variable):
                raise UnsupportedStatement("solution rule literals must be variables")
            ref_vars.add(ref_term.name)
            slot_of[val_term.name] = (element.predicate, 1)
        if len(ref_vars) != 1:
            raise UnsupportedStatement("solution rule must share one reference variable")
        ref_var = next(iter(ref_vars))

        def extract(assignment: dict[str, dict[Value, Value]]) -> SolutionTable:
            rows = []
            for ref_value in self.domains[self.ref_pred or ""]:
                row = []
                for term in head.terms:
                    name = term.name  # type: ignore[union-attr]
                    if name == ref_var:
                        row.append(ref_value)
                    elif name in slot_of:
                        row.append(assignment[slot_of[name][0]][ref_value])
                    else:
                        raise UnsupportedStatement(
                            f"solution head variable {name!r} is not bound by the body"
                        )
                rows.append(tuple(row))
            return SolutionTable(tuple(rows))

        return extract

    def _literal_slot_domain(self, literal: Literal, position: int) -> list[Value]:
        pred = literal.predicate
        if pred in self._pairing_by_pred:
            pairing = self._pairing_by_pred[pred]
            return self.domains[pairing.ref_pred if position == 0 else pairing.val_pred]
        if pred in self.domains and len(literal.terms) == 1:
            return self.domains[pred]
        if pred in self.relational:
            values = []
            for row in self.relational_rows[pred]:
                if row[position] not in values:
                    values.append(row[position])
            return values
        raise UnsupportedStatement(f"unknown predicate {pred!r} in constraint")

    def _expand_solution_literals(self, elements: Iterable[BodyElement]) -> list[BodyElement]:
        out: list[BodyElement] = []
        for element in elements:
            if (
                isinstance(element, Literal)
                and self.show is not None
                and element.predicate == self.show.predicate
            ):
                if element.negated:
                    raise UnsupportedStatement("negated solution literals are not supported")
                if self.solution_rule is None:
                    raise UnsupportedStatement("solution literal without a solution rule")
                mapping = dict(zip(
                    [t.name for t in self.solution_rule.head.terms],  # type: ignore[union-attr]
                    element.terms,
                ))
                if len(mapping) != len(element.terms):
                    raise UnsupportedStatement("solution literal arity mismatch")
                for body_lit in self.solution_rule.body:
                    assert isinstance(body_lit, Literal)
                    out.append(
                        Literal(
                            body_lit.predicate,
                            tuple(mapping[t.name] for t in body_lit.terms),  # type: ignore[union-attr]
                        )
                    )
            else:
                out.append(element)
        return out

    def _compile_check(self, kind: str, stmt: ChoiceRule | IntegrityConstraint) -> _Check:
        if isinstance(stmt, IntegrityConstraint):
            elements = self._expand_solution_literals(stmt.body)
            lower, upper = 1, None  # violated when >=1 grounding holds
        else:
            if len(stmt.elements) != 1:
                raise UnsupportedStatement("cardinality rules must have one element")
            element = stmt.elements[0]
            elements = self._expand_solution_literals(
                (element.target, *element.conditions)
            )
            lower = stmt.lower if stmt.lower is not None else 0
            upper = stmt.upper

        variables: list[str] = []
        domains: dict[str, list[Value]] = {}
        touches: set[str] = set()
        for element in elements:
            if isinstance(element, Literal):
                if element.predicate in self._pairing_by_pred:
                    touches.add(element.predicate)
                for position, term in enumerate(element.terms):
                    if isinstance(term, Variable):
                        domain = self._literal_slot_domain(element, position)
                        if term.name not in domains:
                            domains[term.name] = list(domain)
                            variables.append(term.name)
                        else:
                            domains[term.name] = [v for v in domains[term.name] if v in domain]
                    elif _term_vars(term):
                        raise UnsupportedStatement(
                            "arithmetic inside literal arguments is not supported"
                        )
        comparison_vars = set()
        for element in elements:
            if isinstance(element, Comparison):
                comparison_vars |= _term_vars(element.left) | _term_vars(element.right)
        unbound = comparison_vars - set(variables)
        if unbound:
            raise UnsupportedStatement(
                f"comparison variables {sorted(unbound)} not bound by any literal"
            )

        depth_of = {name: i + 1 for i, name in enumerate(variables)}
        schedule: list[list[BodyElement]] = [[] for _ in range(len(variables) + 1)]
        for element in elements:
            if isinstance(element, Comparison):
                element_vars = _term_vars(element.left) | _term_vars(element.right)
            else:
                element_vars = set()
                for term in element.terms:
                    element_vars |= _term_vars(term)
            depth = max((depth_of[v] for v in element_vars), default=0)
            schedule[depth].append(element)
        return _Check(
            kind=kind,
            elements=tuple(elements),
            variables=tuple(variables),
            domains=tuple(tuple(domains[v]) for v in variables),
            schedule=tuple(tuple(group) for group in schedule),
            lower=lower,
            upper=upper,
            touches=frozenset(touches),
            source=kind,
        )


def _term_vars(term: Term) -> set[str]:
    if isinstance(term, Variable):
        return {term.name}
    if isinstance(term, Arith):
        return _term_vars(term.left) | _term_vars(term.right)
    return set()


# ------------------------------------------------------------------- search


class _Searcher:
    def __init__(self, model: ProgramModel, timeout: float | None):
        self.model = model
        self.timeout = timeout
        self.assign: dict[str, dict[Value, Value]] = {
            p.predicate: {} for p in model.pairings
        }
        self.used: dict[str, set[Value]] = {p.predicate: set() for p in model.pairings}
        self.stats = SolveStats()
        self.tables: list[SolutionTable] = []
        self.started = time.monotonic()

    # -- three-valued evaluation

    def eval_term(self, term: Term, binding: dict[str, Value]) -> Value:
        if isinstance(term, Variable):
            return binding[term.name]
        if isinstance(term, Arith):
            left = self.eval_term(term.left, binding)
            right = self.eval_term(term.right, binding)
            if not isinstance(left, int) or not isinstance(right, int):
                raise UnsupportedStatement("arithmetic over non-integers")
            return left + right if term.op == "+" else left - right
        return _term_value(term)

    def eval_atom(self, literal: Literal, binding: dict[str, Value]) -> int:
        values = tuple(self.eval_term(t, binding) for t in literal.terms)
        pred = literal.predicate
        model = self.model
        if pred in model._pairing_by_pred:
            ref, val = values
            chosen = self.assign[pred].get(ref)
            if chosen is not None:
                return TRUE if chosen == val else FALSE
            if val in self.used[pred]:
                return FALSE
            return UNKNOWN
        if pred in model.relational:
            return TRUE if values in model.relational[pred] else FALSE
        if pred in model.domains and len(values) == 1:
            return TRUE if values[0] in model.domains[pred] else FALSE
        raise UnsupportedStatement(f"unknown predicate {pred!r}")

    def eval_element(self, element: BodyElement, binding: dict[str, Value]) -> int:
        if isinstance(element, Comparison):
            left = self.eval_term(element.left, binding)
            right = self.eval_term(element.right, binding)
            if element.op == "=":
                return TRUE if left == right else FALSE
            if element.op == "!=":
                return TRUE if left != right else FALSE
            if not isinstance(left, int) or not isinstance(right, int):
                raise UnsupportedStatement("ordered comparison over non-integers")
            if element.op == "<":
                return TRUE if left < right else FALSE
            return TRUE if left > right else FALSE
        truth = self.eval_atom(element.positive(), binding)
        if element.negated:
            return {TRUE: FALSE, FALSE: TRUE, UNKNOWN: UNKNOWN}[truth]
        return truth

    def check_violated(self, check: _Check) -> bool:
        """True when the check can no longer be satisfied by any completion
        of the current partial assignment.

        Groundings are enumerated variable by variable; a definitely-false
        element prunes the whole subtree, which keeps the 4-variable
        positional constraints cheap.
        """
        binding: dict[str, Value] = {}
        n_vars = len(check.variables)

        if check.kind == "integrity":
            def holds_somewhere(depth: int, has_unknown: bool) -> bool:
                for element in check.schedule[depth]:
                    truth = self.eval_element(element, binding)
                    if truth == FALSE:
                        return False
                    if truth == UNKNOWN:
                        has_unknown = True
                if depth == n_vars:
                    return not has_unknown
                name = check.variables[depth]
                for value in check.domains[depth]:
                    binding[name] = value
                    if holds_somewhere(depth + 1, has_unknown):
                        return True
                binding.pop(name, None)
                return False

            return holds_somewhere(0, False)

        definite = 0
        possible = 0

        def count(depth: int, has_unknown: bool) -> bool:
            """Walk groundings; True aborts early (upper bound exceeded)."""
            nonlocal definite, possible
            for element in check.schedule[depth]:
                truth = self.eval_element(element, binding)
                if truth == FALSE:
                    return False
                if truth == UNKNOWN:
                    has_unknown = True
            if depth == n_vars:
                possible += 1
                if not has_unknown:
                    definite += 1
                    if check.upper is not None and definite > check.upper:
                        return True
                return False
            name = check.variables[depth]
            for value in check.domains[depth]:
                binding[name] = value
                if count(depth + 1, has_unknown):
                    return True
            binding.pop(name, None)
            return False

        if count(0, False):
            return True
        return possible < check.lower

    # -- backtracking over pairing cells

    def run(self) -> list[SolutionTable]:
        model = self.model
        if model.ref_pred is None:
            raise UnsupportedStatement("program has no bijection pairings")
        refs = model.domains[model.ref_pred]
        cells = [
            (pairing, ref) for pairing in model.pairings for ref in refs
        ]

        def deadline_hit() -> bool:
            return (
                self.timeout is not None
                and time.monotonic() - self.started > self.timeout
            )

        def descend(index: int) -> None:
            self.stats.nodes += 1
            if self.stats.nodes % 64 == 0 and deadline_hit():
                raise SolveTimeout(f"internal solver exceeded {self.timeout}s")
            if index == len(cells):
                self.tables.append(model._solution_extractor(self.assign))
                self.stats.models += 1
                return
            pairing, ref = cells[index]
            pred = pairing.predicate
            for value in model.domains[pairing.val_pred]:
                if value in self.used[pred]:
                    continue
                self.assign[pred][ref] = value
                self.used[pred].add(value)
                if not any(
                    self.check_violated(c)
                    for c in model.checks
                    if pred in c.touches
                ):
                    descend(index + 1)
                del self.assign[pred][ref]
                self.used[pred].remove(value)

        if model.solution_rule is None or model.show is None:
            raise UnsupportedStatement("program needs a solution rule and #show")
        # Checks over static facts only are never re-triggered by a pairing
        # assignment, so evaluate everything once up front.
        if any(self.check_violated(c) for c in model.checks):
            self.stats.elapsed = time.monotonic() - self.started
            return []
        descend(0)
        # Exact re-check is implied: at the leaves every atom is decided, so
        # check_violated was exact for every constraint that touches any pairing.
        self.stats.elapsed = time.monotonic() - self.started
        return self.tables


def solve_internal(
    program: AspProgram | Iterable[Statement],
    timeout: float | None = 60.0,
) -> SolveReport:
    """Enumerate all stable models of the fragment by backtracking over the
    per-pairing bijections, pruning with three-valued constraint checks."""
    statements = program.statements if isinstance(program, AspProgram) else tuple(program)
    model = ProgramModel(statements)
    searcher = _Searcher(model, timeout)
    tables = searcher.run()
    return SolveReport(_status_for(tables), tables, searcher.stats)


# ------------------------------------------------------------------- clingo


_ANSWER_RE = re.compile(r"^Answer: \d+", re.MULTILINE)


def _parse_clingo_models(stdout: str, predicate: str) -> list[frozenset[str]]:
    models: list[frozenset[str]] = []
    lines = stdout.splitlines()
    for i, line in enumerate(lines):
        if line.startswith("Answer:") and i + 1 < len(lines):
            atoms = re.findall(rf"{re.escape(predicate)}\([^()]*\)", lines[i + 1])
            models.append(frozenset(atoms))
    return models


def _atom_row(atom: str) -> Row:
    statements = parse_fragment(atom + ".")
    fact = statements[0]
    assert isinstance(fact, Fact)
    return tuple(_term_value(t) for t in fact.rows[0])


def solve_clingo(
    program: AspProgram | Iterable[Statement],
    binary_path: str = "clingo",
    timeout: float = 60.0,
) -> SolveReport:
    """Write the program to a temp ``.lp`` file, ask Clingo for all models,
    and parse the shown predicate's atoms back into tables."""
    statements = (
        program.statements if isinstance(program, AspProgram) else tuple(program)
    )
    prog = program if isinstance(program, AspProgram) else AspProgram(statements)
    shows = [s for s in statements if isinstance(s, ShowDirective)]
    if len(shows) != 1:
        raise UnsupportedStatement("program needs exactly one #show for clingo runs")
    predicate = shows[0].predicate

    resolved = shutil.which(binary_path)
    if resolved is None:
        raise BinaryNotFound(f"clingo binary not found at {binary_path!r}")

    started = time.monotonic()
    with tempfile.TemporaryDirectory(prefix="amr2asp-") as tmp:
        lp_path = Path(tmp) / "program.lp"
        lp_path.write_text(emit_program(prog), encoding="utf-8")
        try:
            proc = subprocess.run(
                [resolved, str(lp_path), "0", "--verbose=0"],
                capture_output=True,
                text=True,
                timeout=timeout,
            )
        except subprocess.TimeoutExpired:
            raise SolveTimeout(f"clingo exceeded {timeout}s")

    # Clingo exit codes: 10 SAT, 20 UNSAT, 30 SAT with exhausted search.
    if proc.returncode in (10, 30):
        atom_sets = _parse_clingo_models(proc.stdout, predicate)
        tables = []
        for atoms in atom_sets:
            rows = sorted((_atom_row(a) for a in atoms), key=_row_sort_key)
            tables.append(SolutionTable(tuple(rows)))
        stats = SolveStats(models=len(tables), elapsed=time.monotonic() - started)
        return SolveReport(_status_for(tables), tables, stats)
    if proc.returncode == 20:
        stats = SolveStats(elapsed=time.monotonic() - started)
        return SolveReport("unsat", [], stats)
    raise ClingoError(
        f"clingo exited with code {proc.returncode}", proc.stderr.strip()
    )


def _row_sort_key(row: Row):
    return tuple((0, v) if isinstance(v, int) else (1, v) for v in row)


# -------------------------------------------------------------- conveniences


def solve_text(text: str, timeout: float | None = 60.0) -> SolveReport:
    return solve_internal(parse_fragment(text), timeout=timeout)


def drop_statement(program: AspProgram, index: int) -> AspProgram:
    """Program without its index-th constraint-like statement (integrity or
    bodyless choice); used for mutation testing."""
    constraint_positions = [
        i
        for i, s in enumerate(program.statements)
        if isinstance(s, IntegrityConstraint)
        or (isinstance(s, ChoiceRule) and not s.body)
    ]
    target = constraint_positions[index]
    return AspProgram(tuple(
        s for i, s in enumerate(program.statements) if i != target
    ))


def count_constraints(program: AspProgram) -> int:
    return sum(
        1
        for s in program.statements
        if isinstance(s, IntegrityConstraint)
        or (isinstance(s, ChoiceRule) and not s.body)
    )
