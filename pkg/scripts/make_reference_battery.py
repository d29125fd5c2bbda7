"""Regenerate the packaged reference battery file in canonical form.

The composition (3 input / 3 output / 4 mastery / 5 creation sub-tests,
equal weights) is a framework default; run this after editing and commit
the resulting JSON.
"""

from __future__ import annotations

from pathlib import Path

from aiq.battery import (
    Ability,
    Battery,
    ExactMatch,
    KeywordRubric,
    Modality,
    NumericAnswer,
    Prompt,
    Subtest,
    TestItem,
    WeightVector,
    dumps_battery,
    load_battery,
    validate_battery,
)


def text(content: str) -> Prompt:
    return Prompt(modality=Modality.TEXT, content=content)


def image(uri: str) -> Prompt:
    return Prompt(modality=Modality.IMAGE_REF, content=uri)


def audio(uri: str) -> Prompt:
    return Prompt(modality=Modality.AUDIO_REF, content=uri)


def subtest(sid: str, ability: Ability, title: str, items: list[TestItem]) -> Subtest:
    return Subtest(
        id=sid,
        ability=ability,
        title=title,
        items=tuple(items),
        max_points=sum(i.max_points for i in items),
    )


SUBTESTS = [
    # ---- input: can the subject take in text, image, and audio material?
    subtest("in-text", Ability.INPUT, "Following written input", [
        TestItem(
            id="in-text-01",
            prompt=text("Read this sentence and answer: 'The red box is inside the blue box.' Which box is outside?"),
            max_points=4,
            scoring=ExactMatch(answers=("blue", "the blue box", "blue box")),
        ),
        TestItem(
            id="in-text-02",
            prompt=text("How many words are in this phrase: 'knowledge grows when shared'?"),
            max_points=4,
            scoring=NumericAnswer(value=4, tolerance=0),
        ),
    ]),
    subtest("in-image", Ability.INPUT, "Reading referenced images", [
        TestItem(
            id="in-img-01",
            prompt=image("aiq://media/shapes-grid.png"),
            max_points=4,
            scoring=ExactMatch(answers=("circle", "circles")),
        ),
        TestItem(
            id="in-img-02",
            prompt=image("aiq://media/road-sign.png"),
            max_points=4,
            scoring=ExactMatch(answers=("stop", "stop sign")),
        ),
    ]),
    subtest("in-audio", Ability.INPUT, "Transcribing referenced audio", [
        TestItem(
            id="in-aud-01",
            prompt=audio("aiq://media/greeting-short.wav"),
            max_points=4,
            scoring=KeywordRubric(keywords={"hello": 2, "morning": 2}, cap=4),
        ),
        TestItem(
            id="in-aud-02",
            prompt=audio("aiq://media/weather-report.wav"),
            max_points=4,
            scoring=KeywordRubric(keywords={"rain": 2, "tuesday": 1, "wind": 1}, cap=4),
        ),
    ]),
    # ---- output: can the subject express answers clearly and exactly?
    subtest("out-restate", Ability.OUTPUT, "Restating information", [
        TestItem(
            id="out-res-01",
            prompt=text("Explain in one sentence why ice floats on water."),
            max_points=3,
            scoring=KeywordRubric(keywords={"density": 3, "less dense": 3, "lighter": 2}, cap=3),
        ),
        TestItem(
            id="out-res-02",
            prompt=text("State the boiling point of water at sea level, in degrees Celsius."),
            max_points=3,
            scoring=NumericAnswer(value=100, tolerance=0.5),
        ),
    ]),
    subtest("out-format", Ability.OUTPUT, "Producing exactly formatted output", [
        TestItem(
            id="out-fmt-01",
            prompt=text("Write the date 'March 5, 2021' in ISO format (YYYY-MM-DD)."),
            max_points=3,
            scoring=ExactMatch(answers=("2021-03-05",)),
        ),
        TestItem(
            id="out-fmt-02",
            prompt=text("Spell the word 'seven' backwards."),
            max_points=3,
            scoring=ExactMatch(answers=("neves",)),
        ),
    ]),
    subtest("out-narrate", Ability.OUTPUT, "Describing a procedure", [
        TestItem(
            id="out-nar-01",
            prompt=text("Describe how to make a cup of tea, naming the key steps."),
            max_points=3,
            scoring=KeywordRubric(keywords={"boil": 1, "water": 1, "steep": 1, "cup": 1}, cap=3),
        ),
        TestItem(
            id="out-nar-02",
            prompt=text("Give walking directions from a door to a window on the opposite wall."),
            max_points=3,
            scoring=KeywordRubric(keywords={"forward": 1, "turn": 1, "steps": 1, "straight": 1}, cap=3),
        ),
    ]),
    # ---- mastery: does the subject hold world, science, math, language knowledge?
    subtest("know-world", Ability.MASTERY, "World knowledge", [
        TestItem(
            id="kn-wrl-01",
            prompt=text("What is the capital of France?"),
            max_points=5,
            scoring=ExactMatch(answers=("paris",)),
        ),
        TestItem(
            id="kn-wrl-02",
            prompt=text("Which planet is known as the red planet?"),
            max_points=5,
            scoring=ExactMatch(answers=("mars",)),
        ),
    ]),
    subtest("know-science", Ability.MASTERY, "Science knowledge", [
        TestItem(
            id="kn-sci-01",
            prompt=text("Which gas do plants absorb from the atmosphere for photosynthesis?"),
            max_points=5,
            scoring=ExactMatch(answers=("carbon dioxide", "co2")),
        ),
        TestItem(
            id="kn-sci-02",
            prompt=text("At what angle, in degrees, do perpendicular lines meet?"),
            max_points=5,
            scoring=NumericAnswer(value=90, tolerance=0),
        ),
    ]),
    subtest("know-math", Ability.MASTERY, "Arithmetic", [
        TestItem(
            id="kn-mat-01",
            prompt=text("What is 17 multiplied by 6?"),
            max_points=5,
            scoring=NumericAnswer(value=102, tolerance=0),
        ),
        TestItem(
            id="kn-mat-02",
            prompt=text("What is one quarter of 100?"),
            max_points=5,
            scoring=NumericAnswer(value=25, tolerance=0),
        ),
    ]),
    subtest("know-language", Ability.MASTERY, "Language knowledge", [
        TestItem(
            id="kn-lan-01",
            prompt=text("What is the plural of 'mouse' (the animal)?"),
            max_points=5,
            scoring=ExactMatch(answers=("mice",)),
        ),
        TestItem(
            id="kn-lan-02",
            prompt=text("Give an antonym of 'ancient'."),
            max_points=5,
            scoring=ExactMatch(answers=("modern", "new", "recent")),
        ),
    ]),
    # ---- creation: can the subject produce something that was not given?
    subtest("create-analogy", Ability.CREATION, "Completing analogies", [
        TestItem(
            id="cr-ana-01",
            prompt=text("Complete the analogy: bird is to nest as bee is to ___."),
            max_points=4,
            scoring=ExactMatch(answers=("hive", "beehive", "a hive")),
        ),
        TestItem(
            id="cr-ana-02",
            prompt=text("Finish the simile with something genuinely quiet: 'as quiet as ...'"),
            max_points=4,
            scoring=KeywordRubric(keywords={"mouse": 2, "whisper": 2, "snow": 2, "shadow": 2}, cap=4),
        ),
    ]),
    subtest("create-uses", Ability.CREATION, "Alternative uses", [
        TestItem(
            id="cr-use-01",
            prompt=text("Name two unusual uses for a paperclip."),
            max_points=4,
            scoring=KeywordRubric(
                keywords={"lock": 2, "reset": 2, "hook": 2, "bookmark": 2, "zipper": 2}, cap=4
            ),
        ),
        TestItem(
            id="cr-use-02",
            prompt=text("Name two things you could build from cardboard boxes."),
            max_points=4,
            scoring=KeywordRubric(
                keywords={"fort": 2, "house": 2, "robot": 2, "castle": 2, "maze": 2}, cap=4
            ),
        ),
    ]),
    subtest("create-story", Ability.CREATION, "Invention with required elements", [
        TestItem(
            id="cr-sto-01",
            prompt=text("Invent a one-sentence story that mentions a lighthouse and a storm."),
            max_points=4,
            scoring=KeywordRubric(keywords={"lighthouse": 2, "storm": 2}, cap=4),
        ),
        TestItem(
            id="cr-sto-02",
            prompt=text("Coin a name for a machine that folds laundry; the name must contain 'fold'."),
            max_points=4,
            scoring=KeywordRubric(keywords={"fold": 4}, cap=4),
        ),
    ]),
    subtest("create-puzzle", Ability.CREATION, "Lateral puzzles", [
        TestItem(
            id="cr-puz-01",
            prompt=text("Rearrange the digits of 321 to make the smallest possible three-digit number."),
            max_points=4,
            scoring=NumericAnswer(value=123, tolerance=0),
        ),
        TestItem(
            id="cr-puz-02",
            prompt=text("What is the fewest number of straight cuts needed to divide a round cake into 8 equal pieces?"),
            max_points=4,
            scoring=NumericAnswer(value=3, tolerance=0),
        ),
    ]),
    subtest("create-whatif", Ability.CREATION, "Hypothetical invention", [
        TestItem(
            id="cr-wif-01",
            prompt=text("Propose a use for an umbrella on a sunny day."),
            max_points=4,
            scoring=KeywordRubric(keywords={"shade": 2, "sun": 2, "parasol": 2}, cap=4),
        ),
        TestItem(
            id="cr-wif-02",
            prompt=text("Suggest a new holiday and say what it celebrates."),
            max_points=4,
            scoring=KeywordRubric(keywords={"day": 2, "celebrate": 2, "festival": 2}, cap=4),
        ),
    ]),
]


def build() -> Battery:
    return Battery(
        id="reference-battery",
        version="v1",
        weights=WeightVector(0.25, 0.25, 0.25, 0.25),
        subtests=tuple(SUBTESTS),
    )


def main() -> None:
    battery = build()
    violations = validate_battery(battery)
    if violations:
        raise SystemExit("\n".join(f"{v.code} at {v.location}: {v.message}" for v in violations))
    out = Path(__file__).resolve().parent.parent / "src" / "aiq" / "data" / "reference_battery_v1.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(dumps_battery(battery), encoding="utf-8")
    reloaded = load_battery(out)
    assert reloaded == battery, "canonical round-trip must be identity"
    counts = {}
    for st in battery.subtests:
        counts[st.ability.value] = counts.get(st.ability.value, 0) + 1
    print(f"wrote {out} ({len(battery.subtests)} subtests, {len(battery.item_ids())} items, {counts})")


if __name__ == "__main__":
    main()
