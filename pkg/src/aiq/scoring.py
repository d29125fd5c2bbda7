"""Scoring engine: item scores, ability scores, and the weighted IQ.

The aggregate is a linear blend of the four ability scores:

    Q = w_input * input + w_output * output + w_mastery * mastery
        + w_creation * creation

with the weights summing to 1. Ability scores are points ratios on a
0-100 scale, so Q is also bounded to [0, 100].
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from typing import Any, Callable, Union

from .adapters import ResponseOutcome, ResponseRecord
from .battery import (
    Ability,
    Battery,
    ExactMatch,
    HumanRubric,
    KeywordRubric,
    NumericAnswer,
    TestItem,
    WeightVector,
)
from .errors import (
    InvalidAbilityScores,
    InvalidWeights,
    ItemResponseMismatch,
    SessionIncomplete,
)
from .timeutil import utc_now

WEIGHT_SUM_TOLERANCE = 1e-9

_WHITESPACE = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    """Trim, case-fold, and collapse internal whitespace. No stemming."""
    return _WHITESPACE.sub(" ", text.strip()).casefold()


class ScoreMethod(str, Enum):
    AUTO = "auto"
    MANUAL = "manual"


@dataclass(frozen=True)
class ItemScore:
    item_id: str
    points: float
    method: ScoreMethod
    scored_at: datetime
    auto_zero: bool = False
    grader_id: str | None = None


@dataclass(frozen=True)
class PendingHumanGrade:
    """Marker result: the item needs a human grader before it has points."""

    item_id: str


def score_item(
    item: TestItem,
    response: ResponseRecord,
    *,
    clock: Callable[[], datetime] | None = None,
) -> Union[ItemScore, PendingHumanGrade]:
    """Score one response against its item's scoring mode.

    Non-answered outcomes (timeout, transport error, refusal) earn zero
    points with ``auto_zero`` set, regardless of scoring mode. Human-rubric
    items with a captured answer come back as ``PendingHumanGrade``.
    """
    if clock is None:
        clock = utc_now
    if response.item_id != item.id:
        raise ItemResponseMismatch(
            f"response for {response.item_id!r} scored against item {item.id!r}"
        )

    if response.outcome != ResponseOutcome.ANSWERED:
        return ItemScore(
            item_id=item.id,
            points=0.0,
            method=ScoreMethod.AUTO,
            scored_at=clock(),
            auto_zero=True,
        )

    scoring = item.scoring
    if isinstance(scoring, HumanRubric):
        return PendingHumanGrade(item_id=item.id)

    if isinstance(scoring, ExactMatch):
        normalized = normalize_text(response.raw_response)
        keys = {normalize_text(answer) for answer in scoring.answers}
        points = float(item.max_points) if normalized in keys else 0.0
    elif isinstance(scoring, NumericAnswer):
        try:
            value = float(response.raw_response.strip())
        except ValueError:
            value = None
        hit = value is not None and abs(value - scoring.value) <= scoring.tolerance
        points = float(item.max_points) if hit else 0.0
    elif isinstance(scoring, KeywordRubric):
        normalized = normalize_text(response.raw_response)
        earned = sum(
            pts for keyword, pts in scoring.keywords.items()
            if normalize_text(keyword) in normalized
        )
        points = min(float(earned), float(scoring.cap), float(item.max_points))
    else:  # pragma: no cover - scoring modes are closed
        raise ItemResponseMismatch(f"unscorable mode {scoring!r}")

    return ItemScore(
        item_id=item.id,
        points=points,
        method=ScoreMethod.AUTO,
        scored_at=clock(),
    )


@dataclass(frozen=True)
class AbilityScores:
    """The four ability values on a 0-100 points-ratio scale."""

    input: float
    output: float
    mastery: float
    creation: float

    def for_ability(self, ability: Ability) -> float:
        return getattr(self, ability.value)

    def as_mapping(self) -> dict[Ability, float]:
        return {a: self.for_ability(a) for a in Ability}


def ability_scores(session: "Session", battery: Battery) -> AbilityScores:
    """Points ratio per ability across all items of that ability.

    Defined only for complete sessions: every item must carry a final
    score before any ability value exists.
    """
    from .administration import SessionStatus

    if session.status != SessionStatus.COMPLETE:
        raise SessionIncomplete(
            f"session {session.id} is {session.status.value}, not complete"
        )

    earned: dict[Ability, float] = {a: 0.0 for a in Ability}
    attainable: dict[Ability, float] = {a: 0.0 for a in Ability}
    for subtest, item in battery.iter_items():
        score = session.item_scores[item.id]
        earned[subtest.ability] += score.points
        attainable[subtest.ability] += item.max_points

    values = {
        ability: 100.0 * earned[ability] / attainable[ability]
        for ability in Ability
    }
    return AbilityScores(
        input=values[Ability.INPUT],
        output=values[Ability.OUTPUT],
        mastery=values[Ability.MASTERY],
        creation=values[Ability.CREATION],
    )


def provisional_iq(session: "Session", battery: Battery) -> float | None:
    """Running IQ over the items scored so far.

    Each ability uses the points ratio of its already-scored items; defined
    once every ability has at least one scored item, None before that.
    For a complete session this equals the final Q.
    """
    earned: dict[Ability, float] = {a: 0.0 for a in Ability}
    attainable: dict[Ability, float] = {a: 0.0 for a in Ability}
    for subtest, item in battery.iter_items():
        score = session.item_scores.get(item.id)
        if score is None:
            continue
        earned[subtest.ability] += score.points
        attainable[subtest.ability] += item.max_points

    if any(attainable[a] == 0 for a in Ability):
        return None
    return sum(
        battery.weights.for_ability(a) * 100.0 * earned[a] / attainable[a]
        for a in Ability
    )


@dataclass(frozen=True)
class IQResult:
    """The weighted IQ of one subject for one session at one time."""

    subject_ref: str
    session_ref: str
    q: float
    weights: WeightVector
    ability_scores: AbilityScores
    computed_at: datetime

    @property
    def q_display(self) -> str:
        return format_q(self.q)


def format_q(q: float) -> str:
    """Canonical 2-decimal rendering, rounded half-up (e.g. '47.28')."""
    return str(Decimal(repr(q)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def validate_weights(weights: WeightVector) -> None:
    values = (weights.input, weights.output, weights.mastery, weights.creation)
    if any(not (0.0 <= w <= 1.0) for w in values):
        raise InvalidWeights(f"weights {values} must each be in [0, 1]")
    if abs(sum(values) - 1.0) > WEIGHT_SUM_TOLERANCE:
        raise InvalidWeights(f"weights sum {sum(values)!r} != 1.0")


def compute_iq(
    scores: AbilityScores,
    weights: WeightVector,
    *,
    subject_ref: str = "",
    session_ref: str = "",
    computed_at: datetime | None = None,
    clock: Callable[[], datetime] | None = None,
) -> IQResult:
    """Weighted blend of the four ability scores.

    Linear in each ability score; the raw value is retained and the
    2-decimal half-up rendering is a display property.
    """
    if clock is None:
        clock = utc_now
    validate_weights(weights)
    for ability in Ability:
        value = scores.for_ability(ability)
        if not (0.0 <= value <= 100.0):
            raise InvalidAbilityScores(f"{ability.value} score {value!r} not in [0, 100]")

    q = (
        weights.input * scores.input
        + weights.output * scores.output
        + weights.mastery * scores.mastery
        + weights.creation * scores.creation
    )
    return IQResult(
        subject_ref=subject_ref,
        session_ref=session_ref,
        q=q,
        weights=weights,
        ability_scores=scores,
        computed_at=computed_at if computed_at is not None else clock(),
    )


def session_iq(
    session: "Session",
    battery: Battery,
    *,
    clock: Callable[[], datetime] | None = None,
) -> IQResult:
    """Ability scores plus weighted IQ for a complete session."""
    scores = ability_scores(session, battery)
    return compute_iq(
        scores,
        battery.weights,
        subject_ref=session.subject_ref,
        session_ref=session.id,
        clock=clock,
    )


# ---------------------------------------------------------------------------
# Result serialization
# ---------------------------------------------------------------------------


def iq_result_to_dict(result: IQResult) -> dict[str, Any]:
    from .timeutil import isoformat_utc

    return {
        "ability_scores": {
            "creation": result.ability_scores.creation,
            "input": result.ability_scores.input,
            "mastery": result.ability_scores.mastery,
            "output": result.ability_scores.output,
        },
        "computed_at": isoformat_utc(result.computed_at),
        "q": result.q,
        "q_display": result.q_display,
        "session_ref": result.session_ref,
        "subject_ref": result.subject_ref,
        "weights": {
            "creation": result.weights.creation,
            "input": result.weights.input,
            "mastery": result.weights.mastery,
            "output": result.weights.output,
        },
    }


def iq_result_from_dict(raw: dict[str, Any]) -> IQResult:
    from .timeutil import parse_utc

    weights = raw["weights"]
    scores = raw["ability_scores"]
    return IQResult(
        subject_ref=raw["subject_ref"],
        session_ref=raw["session_ref"],
        q=raw["q"],
        weights=WeightVector(
            input=weights["input"],
            output=weights["output"],
            mastery=weights["mastery"],
            creation=weights["creation"],
        ),
        ability_scores=AbilityScores(
            input=scores["input"],
            output=scores["output"],
            mastery=scores["mastery"],
            creation=scores["creation"],
        ),
        computed_at=parse_utc(raw["computed_at"]),
    )
