#!/usr/bin/env python3
"""Seed a store with one awaiting-grades session of three rubric items.

Usage: python3 seed_store.py <store-dir>

Prints the seeded session id. Used by the console's integration tests and
handy for demoing the grading workflow locally:

    python3 frontend/scripts/seed_store.py /tmp/demo-store
    aiq serve --store /tmp/demo-store --assets frontend/dist
"""

from __future__ import annotations

import sys
from datetime import datetime, timezone

from aiq.adapters import AdapterConfig, AdapterKind
from aiq.administration import (
    SessionStore,
    Subject,
    SubjectCategory,
    run_session,
    start_session,
)
from aiq.battery import (
    Ability,
    Battery,
    ExactMatch,
    HumanRubric,
    Modality,
    NumericAnswer,
    Prompt,
    Subtest,
    TestItem,
    WeightVector,
)
from aiq.timeutil import TickingClock


def text_item(item_id: str, prompt: str, scoring, max_points: float) -> TestItem:
    return TestItem(
        id=item_id,
        prompt=Prompt(modality=Modality.TEXT, content=prompt),
        max_points=max_points,
        scoring=scoring,
    )


def demo_battery() -> Battery:
    rubric = "2 points per genuinely novel element the response introduces, up to 6."
    subtests = (
        Subtest(
            id="st-in", ability=Ability.INPUT, title="Following instructions",
            items=(text_item("q-in-1", "Repeat the word: tide", ExactMatch(("tide",)), 4.0),),
            max_points=4.0,
        ),
        Subtest(
            id="st-out", ability=Ability.OUTPUT, title="Exact output",
            items=(text_item("q-out-1", "Spell 'dog' backwards", ExactMatch(("god",)), 4.0),),
            max_points=4.0,
        ),
        Subtest(
            id="st-mas", ability=Ability.MASTERY, title="Arithmetic",
            items=(text_item("q-mas-1", "What is 6 times 7?", NumericAnswer(42, 0), 4.0),),
            max_points=4.0,
        ),
        Subtest(
            id="st-cre", ability=Ability.CREATION, title="Invention",
            items=(
                text_item("q-cre-1", "Invent a short poem about tides.", HumanRubric(rubric), 6.0),
                text_item("q-cre-2", "Describe a new kind of knot and what it is for.", HumanRubric(rubric), 6.0),
                text_item("q-cre-3", "Write a riddle with two valid answers.", HumanRubric(rubric), 6.0),
            ),
            max_points=18.0,
        ),
    )
    return Battery(
        id="demo-rubric-battery",
        version="v1",
        weights=WeightVector(0.25, 0.25, 0.25, 0.25),
        subtests=subtests,
    )


SCRIPTED_RESPONSES = [
    "tide",
    "god",
    "42",
    "the tide returns what the night borrowed",
    "a loop that tightens only when pulled sideways, for hanging lanterns",
    "what gets larger the more you take away? a hole. or a debt.",
]


def main() -> None:
    if len(sys.argv) != 2:
        raise SystemExit("usage: seed_store.py <store-dir>")
    store = SessionStore(sys.argv[1])
    store.add_subject(
        Subject(
            id="demo-system",
            display_name="Demo System",
            category=SubjectCategory.ARTIFICIAL_SYSTEM,
        )
    )
    clock = TickingClock(datetime(2026, 5, 1, 9, 0, 0, tzinfo=timezone.utc))
    responses = iter(SCRIPTED_RESPONSES)
    session = start_session(
        store,
        demo_battery(),
        "demo-system",
        AdapterConfig(kind=AdapterKind.MANUAL_TRANSCRIPT),
        session_id="s-demo",
        clock=clock,
    )
    session = run_session(
        store, session, clock=clock,
        input_fn=lambda: next(responses), output_fn=lambda _line: None,
    )
    assert session.status.value == "awaiting_grades", session.status
    print(session.id)


if __name__ == "__main__":
    main()
