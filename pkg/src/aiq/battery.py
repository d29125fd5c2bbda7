"""Test batteries: the versioned scales administered to subjects.

A battery groups sub-tests by the four abilities (input, output, mastery,
creation), carries the ability weights used by the scoring engine, and is
loaded from a strict canonical JSON format so fixtures stay bit-stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterator, Union

from .errors import ParseError, SchemaViolation

WEIGHT_SUM_TOLERANCE = 1e-9
POINTS_TOLERANCE = 1e-9

# Battery files serialize numbers with at most 9 fractional digits.
_NUM_DIGITS = 9


class Ability(str, Enum):
    """The four measured abilities every battery must cover."""

    INPUT = "input"
    OUTPUT = "output"
    MASTERY = "mastery"
    CREATION = "creation"


class Modality(str, Enum):
    TEXT = "text"
    IMAGE_REF = "image-ref"
    AUDIO_REF = "audio-ref"


@dataclass(frozen=True)
class Prompt:
    """What is shown or sent to the subject.

    Media prompts carry a URI only; the framework never decodes media.
    """

    modality: Modality
    content: str


@dataclass(frozen=True)
class ExactMatch:
    """Full marks iff the normalized response is in the answer key set."""

    answers: tuple[str, ...]

    mode = "exact_match"


@dataclass(frozen=True)
class KeywordRubric:
    """Partial credit: sum of matched keyword points, capped."""

    keywords: dict[str, float]
    cap: float

    mode = "keyword_rubric"


@dataclass(frozen=True)
class NumericAnswer:
    """Full marks iff the parsed number is within tolerance of the value."""

    value: float
    tolerance: float

    mode = "numeric"


@dataclass(frozen=True)
class HumanRubric:
    """Requires a human grader; the point scale is the item's max_points."""

    rubric: str

    mode = "human_rubric"


ScoringMode = Union[ExactMatch, KeywordRubric, NumericAnswer, HumanRubric]


@dataclass(frozen=True)
class TestItem:
    id: str
    prompt: Prompt
    max_points: float
    scoring: ScoringMode

    @property
    def machine_scorable(self) -> bool:
        return not isinstance(self.scoring, HumanRubric)


@dataclass(frozen=True)
class Subtest:
    id: str
    ability: Ability
    title: str
    items: tuple[TestItem, ...]
    max_points: float


@dataclass(frozen=True)
class WeightVector:
    """Ability weights; must sum to 1 within 1e-9, each in [0, 1]."""

    input: float
    output: float
    mastery: float
    creation: float

    def for_ability(self, ability: Ability) -> float:
        return getattr(self, ability.value)

    def as_mapping(self) -> dict[Ability, float]:
        return {a: self.for_ability(a) for a in Ability}


EQUAL_WEIGHTS = WeightVector(0.25, 0.25, 0.25, 0.25)


@dataclass(frozen=True)
class Battery:
    id: str
    version: str
    weights: WeightVector
    subtests: tuple[Subtest, ...]

    def iter_items(self) -> Iterator[tuple[Subtest, TestItem]]:
        """Items in battery order: subtests in order, items in order."""
        for subtest in self.subtests:
            for item in subtest.items:
                yield subtest, item

    def find_item(self, item_id: str) -> TestItem | None:
        for _, item in self.iter_items():
            if item.id == item_id:
                return item
        return None

    def item_ids(self) -> list[str]:
        return [item.id for _, item in self.iter_items()]


@dataclass(frozen=True)
class Violation:
    """One invariant violation; violations are data, never exceptions."""

    code: str
    location: str
    message: str


ValidationReport = list


def validate_battery(battery: Battery) -> list[Violation]:
    """Enumerate every invariant violation in deterministic order.

    Order: weight range, weight sum, subtest presence, then per-subtest
    checks in battery order, then ability coverage. An empty report means
    the battery is valid.
    """
    violations: list[Violation] = []

    for name in ("input", "output", "mastery", "creation"):
        w = getattr(battery.weights, name)
        if not (0.0 <= w <= 1.0):
            violations.append(
                Violation("weight_out_of_range", f"weights.{name}", f"{w!r} not in [0, 1]")
            )
    total = (
        battery.weights.input
        + battery.weights.output
        + battery.weights.mastery
        + battery.weights.creation
    )
    if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
        violations.append(
            Violation("weight_sum_invalid", "weights", f"sum {total:g} != 1.0")
        )

    if not battery.subtests:
        violations.append(Violation("no_subtests", "subtests", "battery has no subtests"))

    seen_subtests: set[str] = set()
    seen_items: set[str] = set()
    for subtest in battery.subtests:
        loc = f"subtests[{subtest.id}]"
        if subtest.id in seen_subtests:
            violations.append(
                Violation("duplicate_subtest_id", loc, f"subtest id {subtest.id!r} repeats")
            )
        seen_subtests.add(subtest.id)

        if not subtest.items:
            violations.append(Violation("empty_items", loc, "subtest has no items"))

        item_total = 0.0
        for item in subtest.items:
            item_loc = f"{loc}.items[{item.id}]"
            if item.max_points <= 0:
                violations.append(
                    Violation(
                        "item_max_points_invalid",
                        item_loc,
                        f"max_points {item.max_points!r} must be positive",
                    )
                )
            # Sessions key responses by item id, so ids must be unique
            # across the whole battery, not just within one subtest.
            if item.id in seen_items:
                violations.append(
                    Violation("duplicate_item_id", item_loc, f"item id {item.id!r} repeats")
                )
            seen_items.add(item.id)
            item_total += item.max_points

        if subtest.items and abs(subtest.max_points - item_total) > POINTS_TOLERANCE:
            violations.append(
                Violation(
                    "subtest_max_points_mismatch",
                    loc,
                    f"max_points {subtest.max_points:g} != item sum {item_total:g}",
                )
            )

    covered = {subtest.ability for subtest in battery.subtests}
    for ability in Ability:
        if ability not in covered:
            violations.append(
                Violation("ability_uncovered", "subtests", f"no subtest covers {ability.value}")
            )

    return violations


# ---------------------------------------------------------------------------
# Strict JSON parsing
# ---------------------------------------------------------------------------


def _require_keys(obj: dict, required: set[str], location: str) -> None:
    if not isinstance(obj, dict):
        raise SchemaViolation(location, f"expected object, got {type(obj).__name__}")
    missing = required - obj.keys()
    if missing:
        raise SchemaViolation(location, f"missing field(s): {', '.join(sorted(missing))}")
    unknown = obj.keys() - required
    if unknown:
        raise SchemaViolation(location, f"unknown field(s): {', '.join(sorted(unknown))}")


def _string(obj: dict, key: str, location: str) -> str:
    value = obj[key]
    if not isinstance(value, str):
        raise SchemaViolation(f"{location}.{key}", "expected string")
    return value


def _number(obj: dict, key: str, location: str) -> float:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolation(f"{location}.{key}", "expected number")
    return value


def _parse_prompt(raw: Any, location: str) -> Prompt:
    _require_keys(raw, {"content", "modality"}, location)
    modality_raw = _string(raw, "modality", location)
    try:
        modality = Modality(modality_raw)
    except ValueError:
        raise SchemaViolation(f"{location}.modality", f"unknown modality {modality_raw!r}")
    return Prompt(modality=modality, content=_string(raw, "content", location))


def _parse_scoring(raw: Any, location: str) -> ScoringMode:
    if not isinstance(raw, dict) or "mode" not in raw:
        raise SchemaViolation(location, "scoring must be an object with a 'mode' field")
    mode = raw["mode"]
    if mode == "exact_match":
        _require_keys(raw, {"mode", "answers"}, location)
        answers = raw["answers"]
        if not isinstance(answers, list) or not answers or not all(isinstance(a, str) for a in answers):
            raise SchemaViolation(f"{location}.answers", "expected non-empty list of strings")
        return ExactMatch(answers=tuple(answers))
    if mode == "keyword_rubric":
        _require_keys(raw, {"mode", "keywords", "cap"}, location)
        keywords = raw["keywords"]
        if not isinstance(keywords, dict) or not keywords:
            raise SchemaViolation(f"{location}.keywords", "expected non-empty object")
        parsed: dict[str, float] = {}
        for kw, pts in keywords.items():
            if isinstance(pts, bool) or not isinstance(pts, (int, float)):
                raise SchemaViolation(f"{location}.keywords[{kw}]", "expected number")
            parsed[kw] = pts
        return KeywordRubric(keywords=parsed, cap=_number(raw, "cap", location))
    if mode == "numeric":
        _require_keys(raw, {"mode", "value", "tolerance"}, location)
        tolerance = _number(raw, "tolerance", location)
        if tolerance < 0:
            raise SchemaViolation(f"{location}.tolerance", "must be >= 0")
        return NumericAnswer(value=_number(raw, "value", location), tolerance=tolerance)
    if mode == "human_rubric":
        _require_keys(raw, {"mode", "rubric"}, location)
        return HumanRubric(rubric=_string(raw, "rubric", location))
    raise SchemaViolation(f"{location}.mode", f"unknown scoring mode {mode!r}")


def _parse_item(raw: Any, location: str) -> TestItem:
    _require_keys(raw, {"id", "max_points", "prompt", "scoring"}, location)
    return TestItem(
        id=_string(raw, "id", location),
        prompt=_parse_prompt(raw["prompt"], f"{location}.prompt"),
        max_points=_number(raw, "max_points", location),
        scoring=_parse_scoring(raw["scoring"], f"{location}.scoring"),
    )


def _parse_subtest(raw: Any, location: str) -> Subtest:
    _require_keys(raw, {"ability", "id", "items", "max_points", "title"}, location)
    ability_raw = _string(raw, "ability", location)
    try:
        ability = Ability(ability_raw)
    except ValueError:
        raise SchemaViolation(f"{location}.ability", f"unknown ability {ability_raw!r}")
    items_raw = raw["items"]
    if not isinstance(items_raw, list):
        raise SchemaViolation(f"{location}.items", "expected list")
    items = tuple(
        _parse_item(item, f"{location}.items[{i}]") for i, item in enumerate(items_raw)
    )
    return Subtest(
        id=_string(raw, "id", location),
        ability=ability,
        title=_string(raw, "title", location),
        items=items,
        max_points=_number(raw, "max_points", location),
    )


def parse_battery(raw: Any) -> Battery:
    """Parse an already-decoded JSON document; strict, no invariant checks."""
    _require_keys(raw, {"id", "subtests", "version", "weights"}, "battery")
    weights_raw = raw["weights"]
    _require_keys(weights_raw, {"a", "b", "c", "d"}, "weights")
    weights = WeightVector(
        input=_number(weights_raw, "a", "weights"),
        output=_number(weights_raw, "b", "weights"),
        mastery=_number(weights_raw, "c", "weights"),
        creation=_number(weights_raw, "d", "weights"),
    )
    subtests_raw = raw["subtests"]
    if not isinstance(subtests_raw, list):
        raise SchemaViolation("subtests", "expected list")
    subtests = tuple(
        _parse_subtest(st, f"subtests[{i}]") for i, st in enumerate(subtests_raw)
    )
    return Battery(
        id=_string(raw, "id", "battery"),
        version=_string(raw, "version", "battery"),
        weights=weights,
        subtests=subtests,
    )


def loads_battery(text: str) -> Battery:
    """Parse battery JSON text and enforce every invariant."""
    if not text.strip():
        raise ParseError("empty battery file")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}")
    battery = parse_battery(raw)
    violations = validate_battery(battery)
    if violations:
        first = violations[0]
        raise SchemaViolation(first.location, first.message)
    return battery


def load_battery(path: str | Path) -> Battery:
    """Load a battery file; parsing is strict and invariants are enforced."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    return loads_battery(path.read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Canonical serialization (alphabetical keys, <= 9 fractional digits)
# ---------------------------------------------------------------------------


def _canon_num(value: float) -> float:
    if isinstance(value, bool) or isinstance(value, int):
        return value
    return round(value, _NUM_DIGITS)


def _scoring_to_dict(scoring: ScoringMode) -> dict[str, Any]:
    if isinstance(scoring, ExactMatch):
        return {"answers": list(scoring.answers), "mode": scoring.mode}
    if isinstance(scoring, KeywordRubric):
        return {
            "cap": _canon_num(scoring.cap),
            "keywords": {k: _canon_num(v) for k, v in sorted(scoring.keywords.items())},
            "mode": scoring.mode,
        }
    if isinstance(scoring, NumericAnswer):
        return {
            "mode": scoring.mode,
            "tolerance": _canon_num(scoring.tolerance),
            "value": _canon_num(scoring.value),
        }
    return {"mode": scoring.mode, "rubric": scoring.rubric}


def battery_to_dict(battery: Battery) -> dict[str, Any]:
    return {
        "id": battery.id,
        "subtests": [
            {
                "ability": st.ability.value,
                "id": st.id,
                "items": [
                    {
                        "id": item.id,
                        "max_points": _canon_num(item.max_points),
                        "prompt": {
                            "content": item.prompt.content,
                            "modality": item.prompt.modality.value,
                        },
                        "scoring": _scoring_to_dict(item.scoring),
                    }
                    for item in st.items
                ],
                "max_points": _canon_num(st.max_points),
                "title": st.title,
            }
            for st in battery.subtests
        ],
        "version": battery.version,
        "weights": {
            "a": _canon_num(battery.weights.input),
            "b": _canon_num(battery.weights.output),
            "c": _canon_num(battery.weights.mastery),
            "d": _canon_num(battery.weights.creation),
        },
    }


def dumps_battery(battery: Battery) -> str:
    return json.dumps(battery_to_dict(battery), ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def save_battery(battery: Battery, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(dumps_battery(battery), encoding="utf-8")
    return path


def reference_battery_path() -> Path:
    """Path of the packaged reference battery (15 sub-tests, equal weights)."""
    return Path(__file__).parent / "data" / "reference_battery_v1.json"


def load_reference_battery() -> Battery:
    return load_battery(reference_battery_path())
