#!/usr/bin/env python3
"""Regenerate the bundled LLM transcripts for the two reference puzzles.

The responses below were recorded once against a live model and then
hand-checked; this script re-renders the prompts (so transcript keys track
any template change) and rewrites fixtures/*/transcript.jsonl.
"""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from amr2asp.fixtures import description_path, transcript_path
from amr2asp.prompt_pipeline import Transcript, render

ZOO_RESPONSES = {
    "categories": "child, favorite_animal, balloon_design, order_in_line, gender",
    "entities": (
        "kerry, johan, mario, lani, naomi, chimpanzees, tigers, zebras, lions, "
        "giraffes, rainbow, hearts, stripes, swirls, polka_dots, first, second, "
        "third, fourth, fifth, boy, girl"
    ),
    "assignment": """child: kerry, johan, mario, lani, naomi
favorite_animal: chimpanzees, tigers, zebras, lions, giraffes
balloon_design: rainbow, hearts, stripes, swirls, polka_dots
order_in_line: first, second, third, fourth, fifth
gender: boy, girl""",
    "facts": """child("Kerry";"Johan";"Mario";"Lani";"Naomi").
favorite_animal("chimpanzees";"tigers";"zebras";"lions";"giraffes").
balloon_design("rainbow";"hearts";"stripes";"swirls";"polka_dots").
order_in_line(1;2;3;4;5).
gender("boy";"girl").
gender_of("Johan","boy").
gender_of("Mario","boy").
gender_of("Kerry","girl").
gender_of("Lani","girl").
gender_of("Naomi","girl").""",
    "pairings": "child, favorite_animal, balloon_design, order_in_line",
    "simplify": """The girl whose favorite animal is the tigers was third in line.
Naomi's favorite animal is not the tigers.
The girl whose favorite animal is the tigers did not receive the balloon with hearts.
The girl whose favorite animal is the tigers did not receive the balloon with stripes.
Johan is not last in line.
Mario is first in line.
A boy is second in line.
Lani's favorite animal is not the tigers.
Lani's favorite animal is not the zebras.
Lani's balloon is not the one with hearts.
Lani's balloon is not the one with stripes.
Naomi's balloon is not the one with hearts.
Naomi's balloon is not the one with stripes.
Mario's balloon is not the one with stripes.
The one whose favorite animal is the zebras was fourth in line.
The one whose favorite animal is the zebras did not receive the balloon with swirls.
The favorite animal of the one whose balloon has the polka dots is the lions.
Johan's favorite animal is not the giraffes.""",
}

EINSTEIN_RESPONSES = {
    "categories": "nationality, house_color, position, beverage, cigar, pet",
    "entities": (
        "englishman, spaniard, ukrainian, norwegian, japanese, red, green, ivory, "
        "yellow, blue, 1, 2, 3, 4, 5, coffee, tea, milk, orange_juice, water, "
        "old_gold, kools, chesterfields, lucky_strike, parliaments, dog, snails, "
        "fox, horse, zebra"
    ),
    "assignment": """nationality: englishman, spaniard, ukrainian, norwegian, japanese
house_color: red, green, ivory, yellow, blue
position: 1, 2, 3, 4, 5
beverage: coffee, tea, milk, orange_juice, water
cigar: old_gold, kools, chesterfields, lucky_strike, parliaments
pet: dog, snails, fox, horse, zebra""",
    "facts": """nationality("englishman";"spaniard";"ukrainian";"norwegian";"japanese").
house_color("red";"green";"ivory";"yellow";"blue").
position(1;2;3;4;5).
beverage("coffee";"tea";"milk";"orange_juice";"water").
cigar("old_gold";"kools";"chesterfields";"lucky_strike";"parliaments").
pet("dog";"snails";"fox";"horse";"zebra").""",
    "pairings": "nationality, house_color, position, beverage, cigar, pet",
    "simplify": """The Englishman's nationality is associated with the house color red.
The Spaniard's nationality is associated with the pet dog.
The beverage coffee is associated with the house color green.
The Ukrainian's nationality is associated with the beverage tea.
The green house is immediately to the right of the ivory house.
The cigar Old Gold is associated with the pet snails.
The cigar Kools is associated with the house color yellow.
The beverage milk is associated with the middle house.
The nationality Norwegian is associated with the first house.
The cigar Chesterfields is next to the pet fox.
The cigar Kools is next to the pet horse.
The cigar Lucky Strike is associated with the beverage orange juice.
The nationality Japanese is associated with the cigar Parliaments.
The nationality Norwegian is next to the blue house.""",
}


def build_transcript(description: str, responses: dict[str, str]) -> Transcript:
    transcript = Transcript(mode="record")
    describe = {"problem description": description}
    transcript.append(render("categories", describe), responses["categories"])
    transcript.append(render("entities", describe), responses["entities"])
    transcript.append(
        render(
            "assignment",
            {
                "categories from prompt1": responses["categories"],
                "entities from prompt2": responses["entities"],
                **describe,
            },
        ),
        responses["assignment"],
    )
    transcript.append(
        render("facts", {"response from prompt 3": responses["assignment"], **describe}),
        responses["facts"],
    )
    predicates = responses["categories"]
    transcript.append(
        render("pairings", {"predicates extracted": predicates, **describe}),
        responses["pairings"],
    )
    transcript.append(
        render("simplify", {"extracted predicates": predicates, **describe}),
        responses["simplify"],
    )
    return transcript


def main() -> None:
    for puzzle, responses in (("zoo", ZOO_RESPONSES), ("einstein", EINSTEIN_RESPONSES)):
        description = description_path(puzzle).read_text(encoding="utf-8").strip()
        transcript = build_transcript(description, responses)
        transcript_path(puzzle).write_text(transcript.dumps(), encoding="utf-8")
        print(f"{puzzle}: {len(transcript.entries)} entries")


if __name__ == "__main__":
    main()
