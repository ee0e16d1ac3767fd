"""Command-line client for the amr2asp service.

Each subcommand maps to one pipeline stage and writes its artifact as a
plain text file into the output directory, so every intermediate result is
inspectable and later stages can be re-run on earlier stages' files:

    facts        puzzle description (+ transcript) -> kb.txt
    rules        kb.txt -> rules.lp
    simplify     puzzle description (+ transcript) -> sentences.txt
    constraints  kb.txt + AMR graphs -> constraints.lp
    compile      kb.txt + constraints.lp (or AMR graphs) -> program.lp
    solve        program.lp -> solution.txt
    e2e          all of the above in sequence

By default the CLI talks to an in-process copy of the service; pass
``--server URL`` to use a remote deployment instead.  Exit codes: 0 ok,
1 usage error, 2 stage failure, 3 unsatisfiable program.
"""

from __future__ import annotations

import argparse
import shlex
import subprocess
import sys
from pathlib import Path

import httpx

from . import fixtures

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_STAGE = 2
EXIT_UNSAT = 3


class UsageError(Exception):
    pass


class StageFailure(Exception):
    pass


class Unsat(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


class _InProcessTransport(httpx.BaseTransport):
    """Synchronous bridge to the in-process ASGI app, so the CLI works with
    no server running while staying an HTTP client of the same service."""

    def __init__(self, app):
        self._asgi = httpx.ASGITransport(app=app)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        import asyncio

        async def call() -> httpx.Response:
            response = await self._asgi.handle_async_request(request)
            content = b"".join([chunk async for chunk in response.stream])
            await response.aclose()
            return httpx.Response(
                response.status_code, headers=response.headers, content=content
            )

        return asyncio.run(call())


class ServiceClient:
    """Thin HTTP client; in-process ASGI transport unless --server is given."""

    def __init__(self, server: str | None):
        if server:
            self._client = httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
        else:
            from .service.app import create_app

            self._client = httpx.Client(
                transport=_InProcessTransport(create_app()),
                base_url="http://amr2asp.internal",
                timeout=600.0,
            )

    def post(self, path: str, payload: dict) -> dict:
        try:
            response = self._client.post(path, json=payload)
        except httpx.HTTPError as err:
            raise StageFailure(f"service request {path} failed: {err}")
        if response.status_code != 200:
            raise StageFailure(_describe_error(path, response))
        return response.json()


def _describe_error(path: str, response: httpx.Response) -> str:
    try:
        detail = response.json().get("detail")
    except ValueError:
        detail = response.text[:500]
    if isinstance(detail, dict):
        stage = f" (stage {detail['stage']})" if detail.get("stage") else ""
        return f"{path}: {detail.get('error', 'error')}{stage}: {detail.get('message', '')}"
    return f"{path}: HTTP {response.status_code}: {detail}"


# ----------------------------------------------------------------- helpers


def _resolve_puzzle(argument: str) -> tuple[str, Path | None]:
    """A puzzle argument is either a description file or the name of a
    bundled puzzle (zoo, einstein); bundled names imply their fixtures."""
    if argument in fixtures.PUZZLES:
        return (
            fixtures.description_path(argument).read_text(encoding="utf-8").strip(),
            fixtures.transcript_path(argument),
        )
    path = Path(argument)
    if not path.is_file():
        raise UsageError(f"puzzle file {argument!r} not found (or use {fixtures.PUZZLES})")
    return path.read_text(encoding="utf-8").strip(), None


def _load_transcript_entries(path: Path | None) -> list[dict] | None:
    if path is None:
        return None
    if not path.is_file():
        raise UsageError(f"transcript file {path} not found")
    import json

    entries = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            record = json.loads(line)
            entries.append({"prompt": record["prompt"], "response": record["response"]})
    return entries


def _pipeline_payload(args) -> dict:
    description, bundled_transcript = _resolve_puzzle(args.puzzle)
    fixtures_path = Path(args.fixtures) if args.fixtures else bundled_transcript
    if args.record:
        if args.fixtures is None:
            raise UsageError("--record needs --fixtures to know where to append")
        entries = (
            _load_transcript_entries(fixtures_path) if fixtures_path.is_file() else []
        )
    else:
        # No transcript at all means live mode; the service validates that
        # an endpoint/model is configured.
        entries = _load_transcript_entries(fixtures_path)
    return {
        "description": description,
        "transcript": entries,
        "record": args.record,
        "reference": args.reference,
        "endpoint": args.endpoint,
        "model": args.model,
    }


def _write_transcript(path: Path, entries: list[dict]) -> None:
    import json

    path.write_text(
        "".join(json.dumps(e) + "\n" for e in entries),
        encoding="utf-8",
    )


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read(path_str: str, what: str) -> str:
    path = Path(path_str)
    if not path.is_file():
        raise UsageError(f"{what} file {path_str!r} not found")
    return path.read_text(encoding="utf-8")


def _amr_texts(args, sentences: list[str] | None) -> list[str]:
    """Collect PENMAN texts from --amr-dir (filename-ordered files, or the
    bundled dir of a named puzzle) or by running --amr-cmd per sentence."""
    amr_dir = args.amr_dir
    if amr_dir is None and args.amr_cmd is None and args.puzzle in fixtures.PUZZLES:
        amr_dir = str(fixtures.amr_dir(args.puzzle))
    if amr_dir is not None:
        directory = Path(amr_dir)
        if directory.is_file():
            return [directory.read_text(encoding="utf-8")]
        if not directory.is_dir():
            raise UsageError(f"--amr-dir {amr_dir!r} is not a directory")
        files = sorted(p for p in directory.iterdir() if p.is_file())
        if not files:
            raise UsageError(f"--amr-dir {amr_dir!r} contains no files")
        return [p.read_text(encoding="utf-8") for p in files]
    if args.amr_cmd is not None:
        if not sentences:
            raise UsageError("--amr-cmd needs simplified sentences (run after simplify)")
        texts = []
        for sentence in sentences:
            argv = [part.replace("{sentence}", sentence) for part in shlex.split(args.amr_cmd)]
            if "{sentence}" not in args.amr_cmd:
                argv.append(sentence)
            proc = subprocess.run(argv, capture_output=True, text=True)
            if proc.returncode != 0:
                raise StageFailure(
                    f"AMR command failed for {sentence!r}: {proc.stderr.strip()}"
                )
            texts.append(proc.stdout)
        return texts
    raise UsageError("provide --amr-dir or --amr-cmd (bundled puzzles imply --amr-dir)")


def _format_solution(solve: dict) -> str:
    lines = []
    for i, table in enumerate(solve["tables"], start=1):
        lines.append(f"Answer: {i}")
        for row in table["rows"]:
            rendered = ",".join(f'"{v}"' if isinstance(v, str) else str(v) for v in row)
            lines.append(f"solution({rendered})")
    lines.append(solve["status"].upper())
    return "\n".join(lines) + "\n"


def _print_solution(solve: dict) -> None:
    print(f"status: {solve['status']} ({len(solve['tables'])} model(s))")
    if solve["clingo_ran"]:
        agreement = "agree" if solve["agreement"] else "DISAGREE"
        print(f"clingo cross-check: {agreement}")
    for table in solve["tables"][:1]:
        for row in table["rows"]:
            rendered = ",".join(f'"{v}"' if isinstance(v, str) else str(v) for v in row)
            print(f"  solution({rendered})")


def _finish_solve(out: Path, solve: dict) -> None:
    (out / "solution.txt").write_text(_format_solution(solve), encoding="utf-8")
    _print_solution(solve)
    if solve["clingo_ran"] and solve["agreement"] is False:
        raise StageFailure(f"solver disagreement: {solve['disagreement']}")
    if solve["status"] == "unsat":
        raise Unsat("program is unsatisfiable")


# -------------------------------------------------------------- subcommands


def cmd_facts(client: ServiceClient, args) -> None:
    out = _out_dir(args)
    data = client.post("/v1/pipeline", _pipeline_payload(args))
    (out / "kb.txt").write_text(data["kb_text"], encoding="utf-8")
    if args.record and args.fixtures:
        _write_transcript(Path(args.fixtures), data["transcript"])
    kb = data["kb"]
    print(
        f"facts: {len(kb['categories'])} categories, reference {kb['reference']}, "
        f"{len(kb['pairings'])} pairings -> {out / 'kb.txt'}"
    )


def cmd_simplify(client: ServiceClient, args) -> None:
    out = _out_dir(args)
    data = client.post("/v1/pipeline", _pipeline_payload(args))
    (out / "sentences.txt").write_text(
        "".join(s + "\n" for s in data["sentences"]), encoding="utf-8"
    )
    if args.record and args.fixtures:
        _write_transcript(Path(args.fixtures), data["transcript"])
    print(f"simplify: {len(data['sentences'])} sentences -> {out / 'sentences.txt'}")


def cmd_rules(client: ServiceClient, args) -> None:
    out = _out_dir(args)
    data = client.post(
        "/v1/rules",
        {"kb_text": _read(args.kb, "knowledge base"), "reference": args.reference},
    )
    (out / "rules.lp").write_text(data["rules_lp"], encoding="utf-8")
    count = sum(1 for line in data["rules_lp"].splitlines() if line.strip())
    print(f"rules: {count} statements -> {out / 'rules.lp'}")


def cmd_constraints(client: ServiceClient, args) -> None:
    out = _out_dir(args)
    sentences = None
    if args.sentences:
        sentences = [
            s for s in _read(args.sentences, "sentences").splitlines() if s.strip()
        ]
    texts = _amr_texts(args, sentences)
    data = client.post(
        "/v1/constraints",
        {
            "kb_text": _read(args.kb, "knowledge base"),
            "reference": args.reference,
            "graphs": [{"penman": t} for t in texts],
        },
    )
    (out / "constraints.lp").write_text(data["constraints_lp"], encoding="utf-8")
    print(
        f"constraints: {len(data['compiled'])} compiled, "
        f"{len(data['skipped'])} skipped -> {out / 'constraints.lp'}"
    )
    for skip in data["skipped"]:
        print(f"  skipped: {skip['sentence']!r}: {skip['reason']}")


def cmd_compile(client: ServiceClient, args) -> None:
    out = _out_dir(args)
    kb_text = _read(args.kb, "knowledge base")
    if args.constraints:
        constraints_lp = _read(args.constraints, "constraints")
    else:
        texts = _amr_texts(args, None)
        data = client.post(
            "/v1/constraints",
            {
                "kb_text": kb_text,
                "reference": args.reference,
                "graphs": [{"penman": t} for t in texts],
            },
        )
        constraints_lp = data["constraints_lp"]
        (out / "constraints.lp").write_text(constraints_lp, encoding="utf-8")
        for skip in data["skipped"]:
            print(f"  skipped: {skip['sentence']!r}: {skip['reason']}")
    data = client.post(
        "/v1/compile",
        {"kb_text": kb_text, "reference": args.reference, "constraints_lp": constraints_lp},
    )
    (out / "program.lp").write_text(data["program_lp"], encoding="utf-8")
    print(f"compile: assembled program -> {out / 'program.lp'}")


def cmd_solve(client: ServiceClient, args) -> None:
    out = _out_dir(args)
    data = client.post(
        "/v1/solve",
        {
            "program_lp": _read(args.program, "program"),
            "solver": "both",
            "clingo_path": args.clingo_path,
            "timeout": args.timeout,
        },
    )
    _finish_solve(out, data)


def cmd_e2e(client: ServiceClient, args) -> None:
    out = _out_dir(args)
    pipeline = client.post("/v1/pipeline", _pipeline_payload(args))
    if args.record and args.fixtures:
        _write_transcript(Path(args.fixtures), pipeline["transcript"])
    kb_model = pipeline["kb"]
    (out / "kb.txt").write_text(pipeline["kb_text"], encoding="utf-8")
    sentences = pipeline["sentences"]
    (out / "sentences.txt").write_text("".join(s + "\n" for s in sentences), encoding="utf-8")
    print(
        f"facts: {len(kb_model['categories'])} categories, reference {kb_model['reference']}, "
        f"{len(kb_model['pairings'])} pairings -> {out / 'kb.txt'}"
    )
    print(f"simplify: {len(sentences)} sentences -> {out / 'sentences.txt'}")

    rules = client.post("/v1/rules", {"kb": kb_model})
    (out / "rules.lp").write_text(rules["rules_lp"], encoding="utf-8")
    print(f"rules: -> {out / 'rules.lp'}")

    texts = _amr_texts(args, sentences)
    constraints = client.post(
        "/v1/constraints", {"kb": kb_model, "graphs": [{"penman": t} for t in texts]}
    )
    (out / "constraints.lp").write_text(constraints["constraints_lp"], encoding="utf-8")
    print(
        f"constraints: {len(constraints['compiled'])} compiled, "
        f"{len(constraints['skipped'])} skipped -> {out / 'constraints.lp'}"
    )
    for skip in constraints["skipped"]:
        print(f"  skipped: {skip['sentence']!r}: {skip['reason']}")

    program = client.post(
        "/v1/compile", {"kb": kb_model, "constraints_lp": constraints["constraints_lp"]}
    )
    (out / "program.lp").write_text(program["program_lp"], encoding="utf-8")
    print(f"compile: -> {out / 'program.lp'}")

    solve = client.post(
        "/v1/solve",
        {
            "program_lp": program["program_lp"],
            "solver": "both",
            "clingo_path": args.clingo_path,
            "timeout": args.timeout,
        },
    )
    _finish_solve(out, solve)


# --------------------------------------------------------------------- main


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("puzzle", help="description file, or bundled puzzle name (zoo, einstein)")
    parser.add_argument("--fixtures", help="transcript file for offline replay")
    parser.add_argument("--record", action="store_true", help="record live responses into --fixtures")
    parser.add_argument("--endpoint", help="chat-completions endpoint URL for live mode")
    parser.add_argument("--model", help="model name for live mode")
    parser.add_argument("--reference", help="reference category override")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--server", help="remote service URL (default: in-process)")
    parser.add_argument("--out", default="out", help="output directory (default: ./out)")
    parser.add_argument("--timeout", type=float, default=60.0, help="solver timeout seconds")


def build_parser() -> _Parser:
    parser = _Parser(prog="amr2asp", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("facts", help="run the fact-extraction prompts, write kb.txt")
    _add_pipeline_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_facts)

    p = sub.add_parser("rules", help="generate bijection rules from kb.txt")
    p.add_argument("--kb", required=True, help="knowledge-base file")
    p.add_argument("--reference", help="reference category override")
    _add_common(p)
    p.set_defaults(func=cmd_rules)

    p = sub.add_parser("simplify", help="run the constraint-simplification prompt")
    _add_pipeline_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_simplify)

    p = sub.add_parser("constraints", help="compile AMR graphs into constraints.lp")
    p.add_argument("--kb", required=True, help="knowledge-base file")
    p.add_argument("--reference", help="reference category override")
    p.add_argument("--amr-dir", help="directory of PENMAN files (filename order)")
    p.add_argument("--amr-cmd", help="command template producing PENMAN for a {sentence}")
    p.add_argument("--sentences", help="simplified-sentences file (for --amr-cmd)")
    p.set_defaults(puzzle="")
    _add_common(p)
    p.set_defaults(func=cmd_constraints)

    p = sub.add_parser("compile", help="assemble the full program.lp")
    p.add_argument("--kb", required=True, help="knowledge-base file")
    p.add_argument("--reference", help="reference category override")
    p.add_argument("--constraints", help="constraints.lp from the constraints stage")
    p.add_argument("--amr-dir", help="compile constraints directly from this AMR directory")
    p.add_argument("--amr-cmd", help=argparse.SUPPRESS)
    p.set_defaults(puzzle="")
    _add_common(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("solve", help="solve a program.lp")
    p.add_argument("program", help="assembled .lp file")
    p.add_argument("--clingo-path", help="clingo binary (default: clingo on PATH)")
    _add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("e2e", help="run every stage and solve")
    _add_pipeline_flags(p)
    p.add_argument("--amr-dir", help="directory of PENMAN files (filename order)")
    p.add_argument("--amr-cmd", help="command template producing PENMAN for a {sentence}")
    p.add_argument("--clingo-path", help="clingo binary (default: clingo on PATH)")
    _add_common(p)
    p.set_defaults(func=cmd_e2e)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        client = ServiceClient(args.server)
        args.func(client, args)
        return EXIT_OK
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except StageFailure as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_STAGE
    except Unsat as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_UNSAT


if __name__ == "__main__":
    sys.exit(main())
