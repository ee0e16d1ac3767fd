import json

import httpx
import pytest

from amr2asp.cli import _InProcessTransport
from amr2asp.fixtures import amr_dir, transcript_path
from amr2asp.knowledge import dump_kb
from amr2asp.service.app import create_app
from amr2asp.service.models import KbModel

from conftest import golden_text


@pytest.fixture(scope="module")
def client() -> httpx.Client:
    return httpx.Client(
        transport=_InProcessTransport(create_app()),
        base_url="http://testserver",
        timeout=120.0,
    )


def _transcript_entries(name: str) -> list[dict]:
    entries = []
    for line in transcript_path(name).read_text().splitlines():
        if line.strip():
            record = json.loads(line)
            entries.append({"prompt": record["prompt"], "response": record["response"]})
    return entries


def _penman_items(name: str) -> list[dict]:
    return [
        {"penman": path.read_text()} for path in sorted(amr_dir(name).iterdir())
    ]


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "ok"


class TestPenmanEndpoints:
    def test_parse(self, client):
        response = client.post(
            "/v1/penman/parse",
            json={"text": "# ::snt An apple.\n(a / apple :mod (g / green))"},
        )
        assert response.status_code == 200
        (graph,) = response.json()["graphs"]
        assert graph["root"] == "a"
        assert graph["sentence"] == "An apple."
        assert len(graph["nodes"]) == 2

    def test_parse_error(self, client):
        response = client.post("/v1/penman/parse", json={"text": "(a / apple"})
        assert response.status_code == 422
        assert response.json()["detail"]["error"] == "UnbalancedParens"

    def test_emit_round_trip(self, client):
        text = "(a / apple\n    :mod (g / green))\n"
        parsed = client.post("/v1/penman/parse", json={"text": text}).json()
        emitted = client.post(
            "/v1/penman/emit", json={"graph": parsed["graphs"][0]}
        ).json()["text"]
        assert emitted == text


class TestPipelineEndpoint:
    def test_zoo_replay(self, client, zoo):
        response = client.post(
            "/v1/pipeline",
            json={
                "description": zoo.description,
                "transcript": _transcript_entries("zoo"),
            },
        )
        assert response.status_code == 200
        data = response.json()
        assert data["kb"]["reference"] == "child"
        assert len(data["sentences"]) == 18
        assert data["kb_text"] == dump_kb(zoo.kb)
        assert KbModel(**data["kb"]).to_kb() == zoo.kb

    def test_replay_miss_is_stage_error(self, client):
        response = client.post(
            "/v1/pipeline",
            json={"description": "An unrecorded puzzle.", "transcript": []},
        )
        assert response.status_code == 422
        detail = response.json()["detail"]
        assert detail["stage"] == "categories"

    def test_live_mode_needs_endpoint(self, client):
        response = client.post(
            "/v1/pipeline", json={"description": "A puzzle.", "transcript": None}
        )
        assert response.status_code == 400


class TestStageEndpoints:
    def test_rules_from_kb_text(self, client, zoo):
        response = client.post("/v1/rules", json={"kb_text": dump_kb(zoo.kb)})
        assert response.status_code == 200
        assert response.json()["rules_lp"] == golden_text("zoo_rules.lp")

    def test_rules_needs_exactly_one_kb(self, client, zoo):
        assert client.post("/v1/rules", json={}).status_code == 400
        both = {"kb_text": dump_kb(zoo.kb), "kb": KbModel.from_kb(zoo.kb).model_dump()}
        assert client.post("/v1/rules", json=both).status_code == 400

    def test_constraints(self, client, zoo):
        response = client.post(
            "/v1/constraints",
            json={"kb_text": dump_kb(zoo.kb), "graphs": _penman_items("zoo")},
        )
        assert response.status_code == 200
        data = response.json()
        assert len(data["compiled"]) == 18
        assert data["compiled"][1]["text"] == ':- favorite_animal_of("Naomi","tigers").'
        assert data["compiled"][0]["form"] == "choice"

    def test_compile_and_solve(self, client, einstein):
        constraints = client.post(
            "/v1/constraints",
            json={"kb_text": dump_kb(einstein.kb), "graphs": _penman_items("einstein")},
        ).json()["constraints_lp"]
        program = client.post(
            "/v1/compile",
            json={"kb_text": dump_kb(einstein.kb), "constraints_lp": constraints},
        ).json()["program_lp"]
        solve = client.post("/v1/solve", json={"program_lp": program}).json()
        assert solve["status"] == "unique"
        rows = {tuple(r) for r in solve["tables"][0]["rows"]}
        assert ("norwegian", "yellow", 1, "water", "kools", "fox") in rows

    def test_solve_rejects_bad_program(self, client):
        response = client.post("/v1/solve", json={"program_lp": "this is not asp"})
        assert response.status_code == 422

    def test_solve_clingo_missing_binary(self, client, zoo):
        from amr2asp.asp_core import emit_program

        response = client.post(
            "/v1/solve",
            json={
                "program_lp": emit_program(zoo.program),
                "solver": "clingo",
                "clingo_path": "/nonexistent/clingo",
            },
        )
        assert response.status_code == 422
        assert response.json()["detail"]["error"] == "BinaryNotFound"


class TestE2EEndpoint:
    def test_zoo(self, client, zoo):
        response = client.post(
            "/v1/e2e",
            json={
                "description": zoo.description,
                "transcript": _transcript_entries("zoo"),
                "graphs": _penman_items("zoo"),
            },
        )
        assert response.status_code == 200
        data = response.json()
        assert data["solve"]["status"] == "unique"
        rows = {tuple(r) for r in data["solve"]["tables"][0]["rows"]}
        assert ("Kerry", "tigers", "swirls", 3) in rows
        assert data["rules_lp"] == golden_text("zoo_rules.lp")
        assert data["program_lp"].endswith("#show solution/4.\n")
