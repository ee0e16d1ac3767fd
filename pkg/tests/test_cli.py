import pytest

from amr2asp.cli import EXIT_OK, EXIT_STAGE, EXIT_UNSAT, EXIT_USAGE, main
from amr2asp.fixtures import amr_dir, description_path, transcript_path

ARTIFACTS = ("kb.txt", "sentences.txt", "rules.lp", "constraints.lp", "program.lp", "solution.txt")


def run(*argv) -> int:
    return main([str(a) for a in argv])


class TestE2E:
    def test_zoo_bundled(self, tmp_path):
        out = tmp_path / "zoo"
        assert run("e2e", "zoo", "--out", out) == EXIT_OK
        for name in ARTIFACTS:
            assert (out / name).is_file(), name
        solution = (out / "solution.txt").read_text()
        assert 'solution("Kerry","tigers","swirls",3)' in solution
        assert solution.strip().endswith("UNIQUE")

    def test_einstein_with_explicit_paths(self, tmp_path):
        out = tmp_path / "einstein"
        code = run(
            "e2e", description_path("einstein"),
            "--fixtures", transcript_path("einstein"),
            "--amr-dir", amr_dir("einstein"),
            "--reference", "house_color",
            "--out", out,
        )
        assert code == EXIT_OK
        assert 'solution("norwegian","yellow",1,"water","kools","fox")' in (
            out / "solution.txt"
        ).read_text()


class TestStageComposability:
    def test_stages_reproduce_e2e(self, tmp_path):
        staged = tmp_path / "staged"
        whole = tmp_path / "whole"
        assert run("e2e", "zoo", "--out", whole) == EXIT_OK

        assert run("facts", "zoo", "--out", staged) == EXIT_OK
        assert run("simplify", "zoo", "--out", staged) == EXIT_OK
        assert run("rules", "--kb", staged / "kb.txt", "--out", staged) == EXIT_OK
        assert run(
            "constraints", "--kb", staged / "kb.txt",
            "--amr-dir", amr_dir("zoo"), "--out", staged,
        ) == EXIT_OK
        assert run(
            "compile", "--kb", staged / "kb.txt",
            "--constraints", staged / "constraints.lp", "--out", staged,
        ) == EXIT_OK
        assert run("solve", staged / "program.lp", "--out", staged) == EXIT_OK

        for name in ARTIFACTS:
            assert (staged / name).read_bytes() == (whole / name).read_bytes(), name

    def test_compile_directly_from_amr_dir(self, tmp_path):
        base = tmp_path / "base"
        assert run("facts", "zoo", "--out", base) == EXIT_OK
        assert run(
            "compile", "--kb", base / "kb.txt", "--amr-dir", amr_dir("zoo"),
            "--out", base,
        ) == EXIT_OK
        assert (base / "program.lp").is_file()
        assert run("solve", base / "program.lp", "--out", base) == EXIT_OK


class TestAmrCommand:
    def test_subprocess_hook(self, tmp_path):
        # A stand-in AMR parser: looks the sentence up among the bundled
        # fixture files and prints the matching PENMAN graph.
        script = tmp_path / "fake_amr_parser.py"
        script.write_text(
            "import sys, pathlib\n"
            f"amr_dir = pathlib.Path({str(amr_dir('zoo'))!r})\n"
            "sentence = sys.argv[1]\n"
            "for path in sorted(amr_dir.iterdir()):\n"
            "    text = path.read_text()\n"
            "    if text.splitlines()[0] == '# ::snt ' + sentence:\n"
            "        print(text)\n"
            "        break\n"
            "else:\n"
            "    sys.exit(1)\n"
        )
        out = tmp_path / "out"
        code = run(
            "e2e", "zoo", "--amr-cmd", f"python3 {script} {{sentence}}", "--out", out
        )
        assert code == EXIT_OK
        assert 'solution("Kerry","tigers","swirls",3)' in (out / "solution.txt").read_text()


class TestExitCodes:
    def test_usage_error_missing_file(self, tmp_path):
        assert run("e2e", "no_such_puzzle.txt", "--out", tmp_path) == EXIT_USAGE

    def test_usage_error_unknown_flag(self, capsys):
        with pytest.raises(SystemExit) as err:
            run("e2e", "zoo", "--bogus")
        assert err.value.code == EXIT_USAGE

    def test_stage_failure_bad_amr(self, tmp_path):
        bad_dir = tmp_path / "amr"
        bad_dir.mkdir()
        (bad_dir / "01.penman").write_text("(a / apple")
        kb_out = tmp_path / "out"
        assert run("facts", "zoo", "--out", kb_out) == EXIT_OK
        code = run(
            "constraints", "--kb", kb_out / "kb.txt", "--amr-dir", bad_dir,
            "--out", kb_out,
        )
        assert code == EXIT_STAGE

    def test_unsat_exit_code(self, tmp_path):
        out = tmp_path / "out"
        assert run("e2e", "zoo", "--out", out) == EXIT_OK
        program = (out / "program.lp").read_text()
        lines = program.splitlines()
        lines.insert(-1, ':- child(C), not order_in_line_of(C,1).')
        unsat = tmp_path / "unsat.lp"
        unsat.write_text("\n".join(lines) + "\n")
        assert run("solve", unsat, "--out", out) == EXIT_UNSAT

    def test_record_without_fixtures(self, tmp_path):
        assert run("facts", "zoo", "--record", "--out", tmp_path) == EXIT_USAGE
