"""FastAPI service wrapping the compile-and-solve pipeline.

Every endpoint is a stateless transform over request content; files,
transcripts, and AMR sources live with the caller (see the CLI, which is a
thin client of this service).  Live LLM calls use the service-side
configuration; the API token never travels over the wire.

Run with: ``uvicorn amr2asp.service.app:app``
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from .. import __version__
from ..assemble import assemble_program
from ..asp_core import AspProgram, emit_program, emit_statements, parse_fragment
from ..constraintgen import compile_corpus
from ..errors import Amr2AspError, BinaryNotFound, PipelineStageError, PromptError
from ..knowledge import KnowledgeBase, dump_kb, load_kb
from ..penman import emit_penman, parse_penman_many
from ..prompt_pipeline import (
    HttpChatClient,
    PipelineResult,
    RecordingClient,
    ReplayClient,
    Transcript,
    TranscriptEntry,
    run_pipeline,
)
from ..rulegen import gen_rules
from ..solver import Agreement, SolveReport, compare, solve_clingo, solve_internal
from .models import (
    CompileRequest,
    CompileResponse,
    CompiledItem,
    ConstraintsRequest,
    ConstraintsResponse,
    E2ERequest,
    E2EResponse,
    EmitRequest,
    EmitResponse,
    KbModel,
    ParseRequest,
    ParseResponse,
    PipelineRequest,
    PipelineResponse,
    RulesRequest,
    RulesResponse,
    SkippedItem,
    SolveRequest,
    SolveResponse,
    SolveStatsModel,
    TableModel,
    TranscriptEntryModel,
)


@dataclass
class ServiceConfig:
    llm_endpoint: str | None = None
    llm_model: str | None = None
    api_key: str | None = None
    clingo_path: str = "clingo"

    @staticmethod
    def from_env() -> "ServiceConfig":
        return ServiceConfig(
            llm_endpoint=os.environ.get("AMR2ASP_LLM_ENDPOINT"),
            llm_model=os.environ.get("AMR2ASP_LLM_MODEL"),
            api_key=os.environ.get("AMR2ASP_API_KEY"),
            clingo_path=os.environ.get("AMR2ASP_CLINGO_PATH", "clingo"),
        )


def _http_error(err: Exception, status: int = 422) -> HTTPException:
    stage = getattr(err, "stage", None)
    return HTTPException(
        status_code=status,
        detail={"error": type(err).__name__, "message": str(err), "stage": stage},
    )


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    cfg = config or ServiceConfig.from_env()
    app = FastAPI(
        title="amr2asp",
        version=__version__,
        description="Compile natural-language logic puzzles into ASP and solve them.",
    )

    @app.exception_handler(Amr2AspError)
    async def _handle_pipeline_error(request, err: Amr2AspError):  # pragma: no cover
        return JSONResponse(
            status_code=422,
            content={
                "detail": {
                    "error": type(err).__name__,
                    "message": str(err),
                    "stage": getattr(err, "stage", None),
                }
            },
        )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    # ------------------------------------------------------------- penman

    @app.post("/v1/penman/parse", response_model=ParseResponse)
    def penman_parse(request: ParseRequest) -> ParseResponse:
        from .models import GraphModel

        try:
            graphs = parse_penman_many(request.text)
        except Amr2AspError as err:
            raise _http_error(err)
        return ParseResponse(graphs=[GraphModel.from_graph(g) for g in graphs])

    @app.post("/v1/penman/emit", response_model=EmitResponse)
    def penman_emit(request: EmitRequest) -> EmitResponse:
        try:
            return EmitResponse(text=emit_penman(request.graph.to_graph()))
        except Amr2AspError as err:
            raise _http_error(err)

    # ------------------------------------------------------------ pipeline

    def _run_pipeline(
        description: str,
        entries: list[TranscriptEntryModel] | None,
        record: bool,
        reference: str | None,
        endpoint: str | None,
        model: str | None,
    ) -> tuple[PipelineResult, Transcript]:
        transcript = Transcript(
            [TranscriptEntry(e.prompt, e.response) for e in (entries or [])],
            mode="record" if record else ("replay" if entries is not None else "live"),
        )
        if record or entries is None:
            live_endpoint = endpoint or cfg.llm_endpoint
            live_model = model or cfg.llm_model
            if not live_endpoint or not live_model:
                raise _http_error(
                    PromptError(
                        "live LLM mode needs an endpoint and model "
                        "(flags or AMR2ASP_LLM_ENDPOINT / AMR2ASP_LLM_MODEL)"
                    ),
                    status=400,
                )
            live = HttpChatClient(live_endpoint, live_model, api_key=cfg.api_key)
            client = RecordingClient(live, transcript)
        else:
            client = ReplayClient(transcript)
        try:
            result = run_pipeline(description.strip(), client, reference_override=reference)
        except (PipelineStageError, Amr2AspError) as err:
            raise _http_error(err)
        return result, transcript

    @app.post("/v1/pipeline", response_model=PipelineResponse)
    def pipeline(request: PipelineRequest) -> PipelineResponse:
        result, transcript = _run_pipeline(
            request.description,
            [e for e in request.transcript] if request.transcript is not None else None,
            request.record,
            request.reference,
            request.endpoint,
            request.model,
        )
        return PipelineResponse(
            kb=KbModel.from_kb(result.kb),
            kb_text=dump_kb(result.kb),
            sentences=result.sentences,
            stage_responses=result.stage_responses,
            transcript=[
                TranscriptEntryModel(prompt=e.prompt, response=e.response)
                for e in transcript.entries
            ],
        )

    def _resolve_kb(kb_model: KbModel | None, kb_text: str | None,
                    reference: str | None = None) -> KnowledgeBase:
        if (kb_model is None) == (kb_text is None):
            raise _http_error(
                PromptError("provide exactly one of 'kb' or 'kb_text'"), status=400
            )
        try:
            if kb_model is not None:
                return kb_model.to_kb()
            return load_kb(kb_text or "", reference_override=reference)
        except Amr2AspError as err:
            raise _http_error(err)

    # --------------------------------------------------------------- rules

    @app.post("/v1/rules", response_model=RulesResponse)
    def rules(request: RulesRequest) -> RulesResponse:
        kb = _resolve_kb(request.kb, request.kb_text, request.reference)
        try:
            generated = gen_rules(kb)
        except Amr2AspError as err:
            raise _http_error(err)
        return RulesResponse(rules_lp=emit_statements(generated.statements()))

    # --------------------------------------------------------- constraints

    def _compile(kb: KnowledgeBase, items) -> ConstraintsResponse:
        try:
            graphs = []
            for item in items:
                graphs.extend(parse_penman_many(item.penman))
            compiled, skipped = compile_corpus(graphs, kb)
        except Amr2AspError as err:
            raise _http_error(err)
        return ConstraintsResponse(
            constraints_lp="".join(c.text + "\n" for c in compiled),
            compiled=[
                CompiledItem(sentence=c.sentence, form=c.form, text=c.text)
                for c in compiled
            ],
            skipped=[SkippedItem(sentence=s.sentence, reason=s.reason) for s in skipped],
        )

    @app.post("/v1/constraints", response_model=ConstraintsResponse)
    def constraints(request: ConstraintsRequest) -> ConstraintsResponse:
        kb = _resolve_kb(request.kb, request.kb_text, request.reference)
        return _compile(kb, request.graphs)

    # -------------------------------------------------------------- compile

    @app.post("/v1/compile", response_model=CompileResponse)
    def compile_program(request: CompileRequest) -> CompileResponse:
        kb = _resolve_kb(request.kb, request.kb_text, request.reference)
        try:
            constraint_statements = parse_fragment(request.constraints_lp)
            program = assemble_program(kb, constraint_statements)
            text = emit_program(program)
        except Amr2AspError as err:
            raise _http_error(err)
        return CompileResponse(program_lp=text)

    # ---------------------------------------------------------------- solve

    def _solve(request: SolveRequest) -> SolveResponse:
        try:
            program = AspProgram(tuple(parse_fragment(request.program_lp)))
        except Amr2AspError as err:
            raise _http_error(err)

        internal_report: SolveReport | None = None
        clingo_report: SolveReport | None = None
        try:
            if request.solver in ("internal", "both"):
                internal_report = solve_internal(program, timeout=request.timeout)
            if request.solver in ("clingo", "both"):
                clingo_report = solve_clingo(
                    program,
                    binary_path=request.clingo_path or cfg.clingo_path,
                    timeout=request.timeout,
                )
        except BinaryNotFound as err:
            if request.solver == "clingo":
                raise _http_error(err)
            clingo_report = None
        except Amr2AspError as err:
            raise _http_error(err)

        primary = internal_report or clingo_report
        assert primary is not None
        agreement: bool | None = None
        disagreement: str | None = None
        if internal_report is not None and clingo_report is not None:
            verdict = compare(internal_report, clingo_report)
            agreement = isinstance(verdict, Agreement)
            if not agreement:
                disagreement = repr(verdict)
        return SolveResponse(
            status=primary.status,
            tables=[TableModel(rows=[list(r) for r in t.rows]) for t in primary.tables],
            stats=SolveStatsModel(
                nodes=primary.stats.nodes,
                models=primary.stats.models,
                elapsed=primary.stats.elapsed,
            ),
            clingo_ran=clingo_report is not None,
            agreement=agreement,
            disagreement=disagreement,
        )

    @app.post("/v1/solve", response_model=SolveResponse)
    def solve(request: SolveRequest) -> SolveResponse:
        return _solve(request)

    # ------------------------------------------------------------------ e2e

    @app.post("/v1/e2e", response_model=E2EResponse)
    def e2e(request: E2ERequest) -> E2EResponse:
        result, transcript = _run_pipeline(
            request.description,
            [e for e in request.transcript] if request.transcript is not None else None,
            request.record,
            request.reference,
            request.endpoint,
            request.model,
        )
        kb_model = KbModel.from_kb(result.kb)
        rules_text = emit_statements(gen_rules(result.kb).statements())
        compiled = _compile(result.kb, request.graphs)
        program = compile_program(
            CompileRequest(kb=kb_model, constraints_lp=compiled.constraints_lp)
        )
        solve_response = _solve(
            SolveRequest(
                program_lp=program.program_lp,
                solver=request.solver,
                clingo_path=request.clingo_path,
                timeout=request.timeout,
            )
        )
        return E2EResponse(
            kb=kb_model,
            kb_text=dump_kb(result.kb),
            sentences=result.sentences,
            rules_lp=rules_text,
            constraints_lp=compiled.constraints_lp,
            program_lp=program.program_lp,
            compiled=compiled.compiled,
            skipped=compiled.skipped,
            solve=solve_response,
            transcript=[
                TranscriptEntryModel(prompt=e.prompt, response=e.response)
                for e in transcript.entries
            ],
        )

    return app


app = create_app()
