"""Bundled input corpus: puzzle descriptions, recorded LLM transcripts, and
AMR graph files for the two reference puzzles."""

from importlib import resources
from pathlib import Path

PUZZLES = ("zoo", "einstein")


def fixture_root() -> Path:
    return Path(str(resources.files(__package__)))


def puzzle_dir(name: str) -> Path:
    if name not in PUZZLES:
        raise KeyError(f"unknown bundled puzzle {name!r}; choose from {PUZZLES}")
    return fixture_root() / name


def description_path(name: str) -> Path:
    return puzzle_dir(name) / "description.txt"


def transcript_path(name: str) -> Path:
    return puzzle_dir(name) / "transcript.jsonl"


def amr_dir(name: str) -> Path:
    return puzzle_dir(name) / "amr"
