from __future__ import annotations

import random
from datetime import datetime, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aiq.adapters import ResponseOutcome, ResponseRecord
from aiq.battery import (
    Ability,
    ExactMatch,
    HumanRubric,
    KeywordRubric,
    NumericAnswer,
    WeightVector,
)
from aiq.errors import (
    InvalidWeights,
    ItemResponseMismatch,
    SessionIncomplete,
)
from aiq.scoring import (
    AbilityScores,
    PendingHumanGrade,
    compute_iq,
    format_q,
    normalize_text,
    score_item,
)

from .conftest import make_item

NOW = datetime(2026, 3, 1, tzinfo=timezone.utc)


def answered(item_id: str, text: str) -> ResponseRecord:
    return ResponseRecord(
        item_id=item_id,
        raw_response=text,
        latency=0.01,
        outcome=ResponseOutcome.ANSWERED,
        received_at=NOW,
    )


def failed(item_id: str, outcome: ResponseOutcome) -> ResponseRecord:
    return ResponseRecord(
        item_id=item_id,
        raw_response="",
        latency=1.0,
        outcome=outcome,
        received_at=NOW,
        detail="stubbed failure",
    )


# ---------------------------------------------------------------------------
# score_item
# ---------------------------------------------------------------------------


def test_exact_match_normalizes_case_and_whitespace():
    item = make_item("q", "2+2?", ExactMatch(("4", "four")))
    score = score_item(item, answered("q", "  Four "))
    assert score.points == item.max_points
    assert score.method.value == "auto"
    assert not score.auto_zero


def test_exact_match_collapses_internal_whitespace():
    item = make_item("q", "name it", ExactMatch(("stop sign",)))
    assert score_item(item, answered("q", "Stop   Sign")).points == item.max_points


def test_exact_match_miss_scores_zero():
    item = make_item("q", "2+2?", ExactMatch(("4",)))
    assert score_item(item, answered("q", "5")).points == 0.0


def test_numeric_within_tolerance():
    item = make_item("q", "pi?", NumericAnswer(3.14, 0.01))
    assert score_item(item, answered("q", "3.145")).points == item.max_points
    # |3.1415 - 3.14| = 0.0015 <= 0.01, so this is a hit too
    assert score_item(item, answered("q", "3.1415")).points == item.max_points


def test_numeric_outside_tolerance_scores_zero():
    item = make_item("q", "pi?", NumericAnswer(3.14, 0.001))
    assert score_item(item, answered("q", "3.1415")).points == 0.0
    item = make_item("q", "pi?", NumericAnswer(3.14, 0.01))
    assert score_item(item, answered("q", "3.16")).points == 0.0


def test_numeric_unparseable_scores_zero():
    item = make_item("q", "pi?", NumericAnswer(3.14, 0.01))
    assert score_item(item, answered("q", "about three")).points == 0.0


def brute_force_keyword_points(keywords: dict[str, float], cap: float, text: str) -> float:
    normalized = normalize_text(text)
    total = 0.0
    for keyword, pts in keywords.items():
        if normalize_text(keyword) in normalized:
            total += pts
    return min(total, cap)


@pytest.mark.parametrize("text,expected", [
    ("Gravity pulls on all MASS", 2.0),   # both matched, capped at 2
    ("gravity does it", 2.0),
    ("it is the mass", 1.0),
    ("magnets", 0.0),
])
def test_keyword_rubric_matches_brute_force_scan(text, expected):
    keywords = {"gravity": 2.0, "mass": 1.0}
    item = make_item("q", "why fall?", KeywordRubric(keywords, cap=2.0))
    assert brute_force_keyword_points(keywords, 2.0, text) == expected
    assert score_item(item, answered("q", text)).points == expected


def test_keyword_points_never_exceed_item_max():
    item = make_item("q", "p", KeywordRubric({"a": 50.0}, cap=50.0), max_points=4.0)
    assert score_item(item, answered("q", "a")).points == 4.0


def test_human_rubric_goes_pending():
    item = make_item("q", "invent", HumanRubric("novelty"), max_points=6)
    result = score_item(item, answered("q", "a tale"))
    assert isinstance(result, PendingHumanGrade)
    assert result.item_id == "q"


@pytest.mark.parametrize("outcome", [
    ResponseOutcome.TIMEOUT,
    ResponseOutcome.TRANSPORT_ERROR,
    ResponseOutcome.REFUSED,
])
def test_non_answers_auto_zero_even_for_human_rubric(outcome):
    for scoring in (ExactMatch(("4",)), HumanRubric("novelty")):
        item = make_item("q", "p", scoring)
        score = score_item(item, failed("q", outcome))
        assert score.points == 0.0
        assert score.auto_zero is True


def test_mismatched_response_is_rejected():
    item = make_item("q", "p", ExactMatch(("4",)))
    with pytest.raises(ItemResponseMismatch):
        score_item(item, answered("other", "4"))


# ---------------------------------------------------------------------------
# ability_scores
# ---------------------------------------------------------------------------


def test_ability_scores_points_ratio(store, subject, tiny_battery, stub_subject, clock):
    from aiq.administration import run_session, start_session
    from aiq.scoring import ability_scores

    # answer both mastery items wrong, everything else right
    server = stub_subject(answers={
        "say alpha": "alpha", "say beta": "beta", "say gamma": "gamma",
        "what is 2+2": "7", "what is 10/4": "nope", "mention a hive": "a bee hive",
    }, echo=False)
    from .conftest import http_adapter
    session = start_session(store, tiny_battery, subject.id, http_adapter(server), clock=clock)
    session = run_session(store, session, clock=clock)
    scores = ability_scores(session, tiny_battery)
    assert scores == AbilityScores(input=100.0, output=100.0, mastery=0.0, creation=100.0)


def test_ability_scores_requires_complete_session(store, subject, tiny_battery, clock):
    from aiq.administration import start_session
    from aiq.scoring import ability_scores
    from aiq.adapters import AdapterConfig, AdapterKind

    session = start_session(
        store, tiny_battery, subject.id,
        AdapterConfig(kind=AdapterKind.MANUAL_TRANSCRIPT), clock=clock,
    )
    with pytest.raises(SessionIncomplete):
        ability_scores(session, tiny_battery)


def test_partial_mastery_ratio_matches_hand_sum():
    # Mastery items worth 40 points total, 25 earned -> 62.5
    assert 100.0 * 25 / 40 == 62.5


# ---------------------------------------------------------------------------
# compute_iq
# ---------------------------------------------------------------------------

EQUAL = WeightVector(0.25, 0.25, 0.25, 0.25)


def summation_oracle(weights: WeightVector, scores: AbilityScores) -> float:
    """Independent recomputation: explicit per-ability product sum."""
    total = 0.0
    for ability in Ability:
        total += weights.for_ability(ability) * scores.for_ability(ability)
    return total


def test_equal_weights_all_hundred_is_exactly_100():
    result = compute_iq(AbilityScores(100, 100, 100, 100), EQUAL)
    assert result.q == 100.0
    assert result.q_display == "100.00"


def test_equal_weights_mixed_scores():
    result = compute_iq(AbilityScores(40, 40, 60, 20), EQUAL)
    assert result.q == 0.25 * (40 + 40 + 60 + 20)
    assert result.q_display == "40.00"


def test_projection_weights_pick_one_ability_exactly():
    result = compute_iq(AbilityScores(73, 12, 99, 5), WeightVector(1, 0, 0, 0))
    assert result.q == 73.0
    assert result.q_display == "73.00"


def test_compute_iq_matches_oracle_on_random_inputs():
    rng = random.Random(20260301)
    for _ in range(1000):
        raw = [rng.random() for _ in range(4)]
        total = sum(raw)
        weights = WeightVector(*(w / total for w in raw))
        scores = AbilityScores(*(rng.uniform(0, 100) for _ in range(4)))
        got = compute_iq(scores, weights).q
        assert abs(got - summation_oracle(weights, scores)) <= 1e-9


def test_invalid_weights_rejected():
    with pytest.raises(InvalidWeights):
        compute_iq(AbilityScores(50, 50, 50, 50), WeightVector(0.3, 0.3, 0.3, 0.3))
    with pytest.raises(InvalidWeights):
        compute_iq(AbilityScores(50, 50, 50, 50), WeightVector(-0.5, 0.5, 0.5, 0.5))


def test_rounding_is_half_up_to_two_decimals():
    assert format_q(47.275) == "47.28"
    assert format_q(47.2849) == "47.28"
    assert format_q(0.005) == "0.01"
    assert format_q(97.0) == "97.00"


# -- property tests ---------------------------------------------------------

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
score_val = st.floats(min_value=0.0, max_value=100.0, allow_nan=False)


@st.composite
def weight_vectors(draw):
    raw = [draw(st.floats(min_value=0.01, max_value=1.0)) for _ in range(4)]
    total = sum(raw)
    normalized = [w / total for w in raw]
    # renormalize the last so the sum is exact within 1e-9
    normalized[3] = 1.0 - normalized[0] - normalized[1] - normalized[2]
    return WeightVector(*normalized)


@st.composite
def ability_score_sets(draw):
    return AbilityScores(*(draw(score_val) for _ in range(4)))


@given(weights=weight_vectors(), scores=ability_score_sets(),
       lam=st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=200, deadline=None)
def test_scaling_all_abilities_scales_q(weights, scores, lam):
    base = compute_iq(scores, weights).q
    scaled = compute_iq(
        AbilityScores(
            scores.input * lam, scores.output * lam,
            scores.mastery * lam, scores.creation * lam,
        ),
        weights,
    ).q
    assert scaled == pytest.approx(base * lam, abs=1e-9)


@given(weights=weight_vectors(), scores=ability_score_sets())
@settings(max_examples=200, deadline=None)
def test_q_is_bounded(weights, scores):
    q = compute_iq(scores, weights).q
    assert -1e-9 <= q <= 100.0 + 1e-9


@given(scores=ability_score_sets())
@settings(max_examples=100, deadline=None)
def test_q_is_100_iff_every_weighted_ability_is_100(scores):
    q = compute_iq(scores, EQUAL).q
    all_hundred = all(
        scores.for_ability(a) == 100.0 for a in Ability
    )
    assert (q == 100.0) == all_hundred


@given(weights=weight_vectors(), scores=ability_score_sets())
@settings(max_examples=200, deadline=None)
def test_weight_permutation_symmetry(weights, scores):
    base = compute_iq(scores, weights).q
    # rotate the (ability, weight) pairs together
    rotated_weights = WeightVector(
        weights.output, weights.mastery, weights.creation, weights.input
    )
    rotated_scores = AbilityScores(
        scores.output, scores.mastery, scores.creation, scores.input
    )
    assert compute_iq(rotated_scores, rotated_weights).q == pytest.approx(base, abs=1e-9)


@given(weights=weight_vectors(), scores=ability_score_sets(),
       bump=st.floats(min_value=0.0, max_value=50.0))
@settings(max_examples=200, deadline=None)
def test_raising_one_ability_never_lowers_q(weights, scores, bump):
    base = compute_iq(scores, weights).q
    raised = compute_iq(
        AbilityScores(
            min(100.0, scores.input + bump), scores.output,
            scores.mastery, scores.creation,
        ),
        weights,
    ).q
    assert raised >= base - 1e-9
