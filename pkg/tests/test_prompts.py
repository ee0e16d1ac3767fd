import httpx
import pytest

from amr2asp.asp_core import Constant, Fact, Integer, emit_statements
from amr2asp.errors import (
    EmptyResponse,
    FactSyntaxError,
    MalformedList,
    MissingBinding,
    PipelineStageError,
    ReplayMiss,
)
from amr2asp.fixtures import description_path, transcript_path
from amr2asp.prompt_pipeline import (
    STAGES,
    TEMPLATES,
    HttpChatClient,
    RecordingClient,
    ReplayClient,
    Transcript,
    parse_categories,
    parse_facts,
    parse_simplified,
    prompt_key,
    render,
    run_pipeline,
)

from conftest import golden_text

ZOO_FACTS_BLOCK = """\
child("Kerry";"Johan";"Mario";"Lani";"Naomi").
favorite_animal("chimpanzees";"tigers";"zebras";"lions";"giraffes").
balloon_design("rainbow";"hearts";"stripes";"swirls";"polka_dots").
order_in_line(1;2;3;4;5).
gender("boy";"girl").
gender_of("Johan","boy").
gender_of("Mario","boy").
gender_of("Kerry","girl").
gender_of("Lani","girl").
gender_of("Naomi","girl").
"""


class TestTemplates:
    @pytest.mark.parametrize("stage", STAGES)
    def test_golden_wording(self, stage):
        assert TEMPLATES[stage] + "\n" == golden_text(f"prompts/{stage}.txt")

    def test_render_substitutes(self):
        text = render("categories", {"problem description": "Some puzzle."})
        assert text.startswith("List each specific category of entities")
        assert text.endswith("Problem description: Some puzzle.")
        assert "{" not in text

    def test_missing_binding(self):
        with pytest.raises(MissingBinding):
            render("pairings", {"problem description": "x"})

    def test_facts_template_keeps_source_quirks(self):
        # The published wording has a misplaced quote and a typo; both are
        # rendered verbatim.
        assert 'P1_of("constant_1, "constant_2").' in TEMPLATES["facts"]
        assert 'entitiy_1' in TEMPLATES["facts"]


class TestParsers:
    def test_categories(self):
        names = parse_categories("child, favorite_animal, balloon_design, order_in_line, gender")
        assert names == ["child", "favorite_animal", "balloon_design", "order_in_line", "gender"]

    def test_single_category(self):
        assert parse_categories("a") == ["a"]

    def test_malformed_categories(self):
        with pytest.raises(MalformedList):
            parse_categories("A, B!")
        with pytest.raises(MalformedList):
            parse_categories("a\nb")

    def test_zoo_facts_block(self):
        categories, relational = parse_facts(ZOO_FACTS_BLOCK)
        assert [name for name, _ in categories] == [
            "child", "favorite_animal", "balloon_design", "order_in_line", "gender",
        ]
        order = dict(categories)["order_in_line"]
        assert order == [1, 2, 3, 4, 5]
        (gender,) = relational
        assert gender.predicate == "gender_of"
        assert len(gender.pairs) == 5

    def test_single_fact(self):
        categories, relational = parse_facts('x("a").')
        assert categories == [("x", ["a"])]
        assert relational == []

    def test_relational_only(self):
        categories, relational = parse_facts('gender_of("Johan","boy").')
        assert categories == []
        assert relational[0].pairs == (("Johan", "boy"),)

    def test_fact_syntax_error_carries_line(self):
        with pytest.raises(FactSyntaxError) as err:
            parse_facts('x("a").\nnot a fact\n')
        assert err.value.line == 2

    def test_facts_round_trip_with_emitter(self):
        categories, relational = parse_facts(ZOO_FACTS_BLOCK)
        facts = []
        for name, entities in categories:
            rows = tuple(
                (Integer(e),) if isinstance(e, int) else (Constant(e),) for e in entities
            )
            facts.append(Fact(name, rows))
        for fact in relational:
            for left, right in fact.pairs:
                facts.append(Fact(fact.predicate, ((Constant(left), Constant(right)),)))
        assert emit_statements(facts) == ZOO_FACTS_BLOCK

    def test_simplified(self):
        assert parse_simplified("a\n\n b \n") == ["a", "b"]
        with pytest.raises(EmptyResponse):
            parse_simplified("  \n ")


class TestTranscript:
    def test_key_is_whitespace_insensitive(self):
        assert prompt_key("a  b\nc") == prompt_key("a b c")
        assert prompt_key("a b") != prompt_key("a c")

    def test_round_trip(self):
        transcript = Transcript()
        transcript.append("prompt one", "response one")
        transcript.append("prompt two", "response two")
        again = Transcript.loads(transcript.dumps())
        assert [e.response for e in again.entries] == ["response one", "response two"]

    def test_replay_lookup(self):
        transcript = Transcript([])
        transcript.append("hello", "world")
        client = ReplayClient(transcript)
        assert client.send("hello") == "world"
        with pytest.raises(ReplayMiss):
            client.send("other")

    def test_recording_client_appends(self):
        class Fixed:
            def send(self, prompt):
                return f"echo:{prompt}"

        transcript = Transcript(mode="record")
        client = RecordingClient(Fixed(), transcript)
        assert client.send("a") == "echo:a"
        assert client.send("a") == "echo:a"
        assert len(transcript.entries) == 1


class TestHttpClient:
    def test_payload_and_parse(self):
        captured = {}

        def handler(request: httpx.Request) -> httpx.Response:
            import json

            captured.update(json.loads(request.content))
            captured["auth"] = request.headers.get("authorization")
            return httpx.Response(
                200,
                json={"choices": [{"message": {"content": "fine"}}]},
            )

        client = HttpChatClient(
            "https://chat.example/v1/chat/completions",
            "model-x",
            api_key="secret",
            client=httpx.Client(transport=httpx.MockTransport(handler)),
        )
        assert client.send("ping") == "fine"
        assert captured["temperature"] == 0
        assert captured["model"] == "model-x"
        assert captured["messages"] == [{"role": "user", "content": "ping"}]
        assert captured["auth"] == "Bearer secret"


class TestPipeline:
    def test_replay_determinism(self, zoo):
        transcript = Transcript.loads(transcript_path("zoo").read_text())
        description = description_path("zoo").read_text().strip()
        first = run_pipeline(description, ReplayClient(transcript))
        second = run_pipeline(description, ReplayClient(transcript))
        assert first.kb == second.kb
        assert first.sentences == second.sentences
        assert first.kb == zoo.kb

    def test_replay_miss_names_stage(self):
        with pytest.raises(PipelineStageError) as err:
            run_pipeline("A puzzle nobody recorded.", ReplayClient(Transcript([])))
        assert err.value.stage == "categories"
        assert isinstance(err.value.cause, ReplayMiss)

    def test_stage_order(self):
        sent = []

        class Script:
            def __init__(self):
                self.transcript = Transcript.loads(transcript_path("zoo").read_text())

            def send(self, prompt):
                sent.append(prompt)
                response = self.transcript.lookup(prompt)
                assert response is not None
                return response

        description = description_path("zoo").read_text().strip()
        run_pipeline(description, Script())
        openers = [p.splitlines()[0][:20] for p in sent]
        assert openers == [
            "List each specific c",
            "List all the entitie",
            "Given the following ",
            "Given the following ",
            "Given predicates: ch",
            "Create a series of c",
        ]
