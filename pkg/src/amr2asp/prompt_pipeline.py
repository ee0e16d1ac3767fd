"""The six-stage LLM prompt pipeline: template rendering, response parsing,
transcript record/replay, and the stage runner that turns a puzzle
description into a knowledge base plus simplified constraint sentences.

Template wording is frozen; golden tests compare it byte-for-byte.  All
stages run strictly in sequence because each prompt consumes earlier
responses.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from typing import Callable, Protocol

import httpx

from . import asp_core
from .errors import (
    AspSyntaxError,
    EmptyResponse,
    FactSyntaxError,
    MalformedList,
    MissingBinding,
    PipelineStageError,
    PromptError,
    ReplayMiss,
)
from .knowledge import Entity, KnowledgeBase, RelationalFact, build_kb

STAGES = ("categories", "entities", "assignment", "facts", "pairings", "simplify")

TEMPLATES: dict[str, str] = {
    "categories": (
        "List each specific category of entities in this logic puzzle is asking to be "
        "determined, both implicitly and explicitly. Respond with only the list of "
        "categories and nothing else. Format the list in one line separated by commas. "
        "If multiple words are required to describe the category, separate them by "
        "underscores. Use only lowercase and alphanumeric characters. If a category in "
        "your list has a singular form, use the singular form. Take your time and "
        "double-check your answer. Use a value of 0 for the temperature.\n"
        "Problem description: {problem description}"
    ),
    "entities": (
        "List all the entities in this logic puzzle. Respond with only the list of "
        "entities and nothing else. Format the list in one line separated by commas. "
        "If multiple words are required to describe the entity, separate them by "
        "underscores. Use only lowercase and alphanumeric characters. Take your time "
        "and double-check your answer. Use a value of 0 for the temperature.\n"
        "Problem description: {problem description}"
    ),
    "assignment": (
        "Given the following categories and entities:\n"
        "- Categories: {categories from prompt1}\n"
        "- Entities: {entities from prompt2}\n"
        "Assign entities to each category to which they belong. Entities may belong to "
        "more than one category. Format the list of entities that belong to a certain "
        "category as follows:\n"
        "category: entity_1, entity_2, …, entity_N\n"
        "In the response, start a new line for each list of entities in a category. The "
        "response should only include the lists, and nothing else. Take your time and "
        "double-check your answer. Use a value of 0 for the temperature.\n"
        "Problem description: {problem description}"
    ),
    "facts": (
        "Given the following lists of entities assigned to a certain category:\n"
        "{response from prompt 3}\n"
        "In terms of Answer Set Programming code, represent each list of entities "
        "assigned to a category as an ASP fact in the following format:\n"
        'category("entitiy_1";"entitiy_2";...;"entitiy_N").\n'
        "Start a new line after each ASP fact. Respond with only ASP facts and nothing "
        "else. If an entity is numeral or ordinal, represent it in numeral format "
        "without quotation marks. If a predicate (category), P1 is inherently an "
        "attribute of another predicate, P2, format a fact in the following format:\n"
        'P1_of("constant_1, "constant_2").\n'
        "Do not try to solve the logic puzzle. Take your time and double-check your "
        "answer. Use a temperature of 0.\n"
        "Problem description: {problem description}"
    ),
    "pairings": (
        "Given predicates: {predicates extracted}\n"
        "In the following prompt, which of the given predicates has a one-to-one "
        "pairing? Format the list in one line separated by commas. Use only lowercase "
        "and alphanumeric characters. Take your time and double-check your answer. Use "
        "a temperature of 0:\n"
        "{problem description}"
    ),
    "simplify": (
        "Create a series of constraints from the following text. Never list "
        "constant/category relations as constraints. Never include irrelevant "
        "information (instructions, background, etc.). Output on separate lines; never "
        "use list format. Use these keywords throughout for consistent language: "
        "{extracted predicates}.\n"
        "{problem description}"
    ),
}

_PLACEHOLDER_RE = re.compile(r"\{([^{}]+)\}")


def render(template_id: str, bindings: dict[str, str]) -> str:
    """Substitute placeholders; every placeholder must be bound."""
    body = TEMPLATES[template_id]

    def substitute(match: re.Match) -> str:
        key = match.group(1)
        if key not in bindings:
            raise MissingBinding(f"template {template_id!r} needs {{{key}}}")
        return bindings[key]

    return _PLACEHOLDER_RE.sub(substitute, body)


# ------------------------------------------------------------ response parsing


_IDENT_RE = re.compile(r"[a-z][a-z0-9_]*$")


def parse_name_list(text: str) -> list[str]:
    lines = [line for line in text.strip().splitlines() if line.strip()]
    if len(lines) != 1:
        raise MalformedList(f"expected one comma-separated line, got {len(lines)} lines")
    names = [part.strip() for part in lines[0].split(",")]
    for name in names:
        if not _IDENT_RE.match(name):
            raise MalformedList(f"{name!r} is not a lowercase identifier")
    return names


def parse_categories(text: str) -> list[str]:
    return parse_name_list(text)


def parse_pairings(text: str) -> list[str]:
    return parse_name_list(text)


def parse_facts(text: str) -> tuple[list[tuple[str, list[Entity]]], list[RelationalFact]]:
    """Parse the ASP-fact response block into category domains and grouped
    relational facts.  Any non-fact line is a syntax error with its line
    number."""
    categories: list[tuple[str, list[Entity]]] = []
    relational: dict[str, list[tuple[str, str]]] = {}
    relational_order: list[str] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            statements = asp_core.parse_fragment(line)
        except AspSyntaxError as err:
            raise FactSyntaxError(line_no, str(err))
        if len(statements) != 1 or not isinstance(statements[0], asp_core.Fact):
            raise FactSyntaxError(line_no, f"not an ASP fact: {line}")
        fact = statements[0]
        arities = {len(row) for row in fact.rows}
        if fact.predicate.endswith("_of"):
            if arities != {2}:
                raise FactSyntaxError(line_no, f"{fact.predicate} pairs must be binary")
            for row in fact.rows:
                pair = tuple(_fact_term_value(line_no, t) for t in row)
                if fact.predicate not in relational:
                    relational[fact.predicate] = []
                    relational_order.append(fact.predicate)
                relational[fact.predicate].append((str(pair[0]), str(pair[1])))
        else:
            if arities != {1}:
                raise FactSyntaxError(line_no, f"category fact {fact.predicate} must pool single terms")
            entities = [_fact_term_value(line_no, row[0]) for row in fact.rows]
            categories.append((fact.predicate, entities))
    return categories, [
        RelationalFact(name, tuple(relational[name])) for name in relational_order
    ]


def _fact_term_value(line_no: int, term: asp_core.Term) -> Entity:
    if isinstance(term, asp_core.Constant):
        return term.text
    if isinstance(term, asp_core.Integer):
        return term.value
    raise FactSyntaxError(line_no, f"facts must be ground, got {term!r}")


def parse_simplified(text: str) -> list[str]:
    sentences = [line.strip() for line in text.splitlines() if line.strip()]
    if not sentences:
        raise EmptyResponse("simplification stage returned no sentences")
    return sentences


# ------------------------------------------------------------------ transcript


def prompt_key(prompt: str) -> str:
    """Content-derived transcript key (whitespace-insensitive)."""
    normalized = re.sub(r"\s+", " ", prompt.strip())
    return hashlib.sha256(normalized.encode("utf-8")).hexdigest()[:16]


@dataclass
class TranscriptEntry:
    prompt: str
    response: str

    @property
    def key(self) -> str:
        return prompt_key(self.prompt)


@dataclass
class Transcript:
    entries: list[TranscriptEntry] = field(default_factory=list)
    mode: str = "replay"  # replay | record | live

    def lookup(self, prompt: str) -> str | None:
        key = prompt_key(prompt)
        for entry in self.entries:
            if entry.key == key:
                return entry.response
        return None

    def append(self, prompt: str, response: str) -> None:
        self.entries.append(TranscriptEntry(prompt, response))

    @staticmethod
    def loads(text: str, mode: str = "replay") -> "Transcript":
        entries = []
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                entries.append(TranscriptEntry(record["prompt"], record["response"]))
            except (json.JSONDecodeError, KeyError) as err:
                raise PromptError(f"transcript line {line_no}: {err}")
        return Transcript(entries, mode)

    def dumps(self) -> str:
        return "".join(
            json.dumps({"key": e.key, "prompt": e.prompt, "response": e.response}) + "\n"
            for e in self.entries
        )


class ChatClient(Protocol):
    def send(self, prompt: str) -> str: ...


class ReplayClient:
    """Deterministic offline client backed by a transcript."""

    def __init__(self, transcript: Transcript):
        self.transcript = transcript
        self.stage = "?"

    def send(self, prompt: str) -> str:
        response = self.transcript.lookup(prompt)
        if response is None:
            raise ReplayMiss(self.stage, prompt)
        return response


class RecordingClient:
    """Forwards to a live client and appends every exchange."""

    def __init__(self, inner: ChatClient, transcript: Transcript):
        self.inner = inner
        self.transcript = transcript
        self.stage = "?"

    def send(self, prompt: str) -> str:
        cached = self.transcript.lookup(prompt)
        if cached is not None:
            return cached
        response = self.inner.send(prompt)
        self.transcript.append(prompt, response)
        return response


class HttpChatClient:
    """Chat-completions style endpoint.  Temperature is pinned to 0 in the
    request on top of the in-prompt instruction."""

    def __init__(self, endpoint: str, model: str, api_key: str | None = None,
                 timeout: float = 120.0, client: httpx.Client | None = None):
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key
        self._client = client or httpx.Client(timeout=timeout)

    def send(self, prompt: str) -> str:
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        }
        response = self._client.post(self.endpoint, json=payload, headers=headers)
        if response.status_code != 200:
            raise PromptError(f"chat endpoint returned {response.status_code}: {response.text[:500]}")
        data = response.json()
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as err:
            raise PromptError(f"malformed chat response: {err}")


# ---------------------------------------------------------------- stage runner


@dataclass
class PipelineResult:
    kb: KnowledgeBase
    sentences: list[str]
    stage_responses: dict[str, str]


def run_pipeline(
    description: str,
    client: ChatClient,
    reference_override: str | None = None,
) -> PipelineResult:
    """Run categories -> entities -> assignment -> facts -> pairings ->
    simplify, feeding each response forward; returns the validated
    knowledge base and simplified constraint sentences."""
    responses: dict[str, str] = {}

    def ask(stage: str, bindings: dict[str, str], parser: Callable):
        prompt = render(stage, bindings)
        if hasattr(client, "stage"):
            client.stage = stage
        try:
            response = client.send(prompt)
            parsed = parser(response)
        except PipelineStageError:
            raise
        except Exception as err:
            raise PipelineStageError(stage, err)
        responses[stage] = response
        return parsed

    describe = {"problem description": description}
    category_names = ask("categories", describe, parse_categories)
    ask("entities", describe, lambda text: text.strip())
    assignment = ask(
        "assignment",
        {
            "categories from prompt1": responses["categories"].strip(),
            "entities from prompt2": responses["entities"].strip(),
            **describe,
        },
        lambda text: text.strip(),
    )
    categories, relational = ask(
        "facts",
        {"response from prompt 3": assignment, **describe},
        parse_facts,
    )
    predicates = ", ".join(name for name, _ in categories)
    pairing_names = ask(
        "pairings",
        {"predicates extracted": predicates, **describe},
        parse_pairings,
    )
    try:
        kb = build_kb(
            categories,
            relational,
            pairing_names,
            reference_override or (category_names[0] if category_names else None),
        )
    except Exception as err:
        raise PipelineStageError("pairings", err)
    sentences = ask(
        "simplify",
        {"extracted predicates": predicates, **describe},
        parse_simplified,
    )
    return PipelineResult(kb, sentences, responses)
