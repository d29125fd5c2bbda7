"""Intelligence grade classifier.

Maps a capability profile (measured I/O and creation evidence, observed
storage trajectory, declared sharing and unbounded-growth markers) to a
grade 0-6 with diagnostics for the next grade up.

Grades 0 and 1 are degenerate I/O cases and are decided before any other
capability is examined. Above them the grades form a cumulative ladder:

    2: two-way I/O plus a positive knowledge store
    3: ... whose stored magnitude grows over time
    4: ... shared with other systems
    5: ... plus knowledge creation
    6: all four channels declared unbounded

Sharing and unboundedness cannot be observed through a Q&A adapter; they
are declared structural facts, so profiles mix measurement with declared
evidence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Sequence

from .battery import Ability
from .errors import ParseError, ProfileInvalid, UnsortedObservations
from .timeutil import isoformat_utc, parse_utc


class StorageTrend(str, Enum):
    EMPTY = "empty"
    ZERO = "zero"
    FIXED = "fixed"
    INCREASING = "increasing"


@dataclass(frozen=True)
class StorageObservation:
    """Stored-knowledge magnitude measured at one instant."""

    at: datetime
    level: float


@dataclass(frozen=True)
class CapabilityProfile:
    subject_ref: str
    input_positive: bool
    output_positive: bool
    storage_observations: tuple[StorageObservation, ...]
    sharing: bool
    creation_positive: bool
    unbounded: frozenset[Ability] = frozenset()
    evidence_notes: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class GradeResult:
    grade: int
    matched_conditions: tuple[str, ...]
    next_grade_gaps: tuple[str, ...]
    degenerate: bool


GRADE_MIN = 0
GRADE_MAX = 6


def storage_trend(
    observations: Sequence[StorageObservation], eps: float = 0.0
) -> StorageTrend:
    """Classify a stored-knowledge trajectory.

    Empty without observations; Zero when every level is within eps of
    nothing; Increasing when the last level exceeds the first by more than
    eps (needs at least two observations); Fixed otherwise.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    for earlier, later in zip(observations, observations[1:]):
        if later.at <= earlier.at:
            raise UnsortedObservations(
                f"observation at {later.at} does not follow {earlier.at}"
            )
    if not observations:
        return StorageTrend.EMPTY
    if all(obs.level <= eps for obs in observations):
        return StorageTrend.ZERO
    if len(observations) >= 2 and observations[-1].level > observations[0].level + eps:
        return StorageTrend.INCREASING
    return StorageTrend.FIXED


def validate_profile(profile: CapabilityProfile) -> None:
    for obs in profile.storage_observations:
        if obs.level < 0:
            raise ProfileInvalid(f"storage level {obs.level!r} must be >= 0")
    for earlier, later in zip(profile.storage_observations, profile.storage_observations[1:]):
        if later.at <= earlier.at:
            raise ProfileInvalid("storage observations must strictly increase in time")

    claims = {
        Ability.INPUT: profile.input_positive,
        Ability.OUTPUT: profile.output_positive,
        Ability.CREATION: profile.creation_positive,
        Ability.MASTERY: any(obs.level > 0 for obs in profile.storage_observations),
    }
    for ability in profile.unbounded:
        if not claims[ability]:
            raise ProfileInvalid(
                f"unbounded marker for {ability.value} without positive evidence"
            )


def classify_grade(profile: CapabilityProfile, eps: float = 0.0) -> GradeResult:
    """Assign the grade; total over valid profiles.

    Missing I/O dominates everything else: a sharing, creative profile
    with one-way I/O is still grade 0. Creation alone never blocks a
    ladder grade below 5 — a creative but non-sharing system still earns
    the highest grade its other capabilities support.
    """
    validate_profile(profile)

    matched: list[str] = []
    if profile.input_positive:
        matched.append("input_positive")
    if profile.output_positive:
        matched.append("output_positive")

    trend = storage_trend(profile.storage_observations, eps)

    if profile.input_positive != profile.output_positive:
        return GradeResult(
            grade=0,
            matched_conditions=tuple(matched) or ("one_way_io",),
            next_grade_gaps=_ladder_entry_gaps(profile, trend),
            degenerate=True,
        )
    if not profile.input_positive and not profile.output_positive:
        return GradeResult(
            grade=1,
            matched_conditions=("no_io",),
            next_grade_gaps=_ladder_entry_gaps(profile, trend),
            degenerate=True,
        )

    storage_present = trend in (StorageTrend.FIXED, StorageTrend.INCREASING)
    all_unbounded = profile.unbounded == frozenset(Ability)
    rungs = [
        (2, "storage_present", storage_present),
        (3, "storage_increasing", trend == StorageTrend.INCREASING),
        (4, "sharing", profile.sharing),
        (5, "creation_positive", profile.creation_positive),
        (6, "unbounded_all", all_unbounded),
    ]

    grade = 1
    gaps: tuple[str, ...] = ()
    for rung, condition, met in rungs:
        if not met:
            gaps = _describe_gap(condition, profile, trend)
            break
        grade = rung
        if condition == "storage_present":
            matched.append(f"storage_present({trend.value})")
        else:
            matched.append(condition)

    if grade == 6:
        gaps = ()
    if profile.creation_positive and grade < 5 and "creation_positive" not in matched:
        matched.append("creation_positive(not required below grade 5)")

    return GradeResult(
        grade=grade,
        matched_conditions=tuple(matched),
        next_grade_gaps=gaps,
        degenerate=grade in (0, 1),
    )


def _ladder_entry_gaps(profile: CapabilityProfile, trend: StorageTrend) -> tuple[str, ...]:
    """For degenerate grades the useful target is the first ladder grade."""
    gaps = []
    if not profile.input_positive:
        gaps.append("input_positive")
    if not profile.output_positive:
        gaps.append("output_positive")
    if trend not in (StorageTrend.FIXED, StorageTrend.INCREASING):
        gaps.append("storage_present")
    return tuple(gaps)


def _describe_gap(
    condition: str, profile: CapabilityProfile, trend: StorageTrend
) -> tuple[str, ...]:
    if condition == "unbounded_all":
        missing = sorted(frozenset(Ability) - profile.unbounded, key=lambda a: a.value)
        return tuple(f"unbounded:{a.value}" for a in missing) or ("unbounded_all",)
    return (condition,)


# ---------------------------------------------------------------------------
# Profile files
# ---------------------------------------------------------------------------

_PROFILE_KEYS = {
    "creation_positive",
    "evidence_notes",
    "input_positive",
    "output_positive",
    "sharing",
    "storage_observations",
    "subject_ref",
    "unbounded",
}


def profile_from_dict(raw: dict[str, Any]) -> CapabilityProfile:
    if not isinstance(raw, dict):
        raise ProfileInvalid("profile must be a JSON object")
    unknown = raw.keys() - _PROFILE_KEYS
    if unknown:
        raise ProfileInvalid(f"unknown field(s): {', '.join(sorted(unknown))}")
    missing = {
        "subject_ref",
        "input_positive",
        "output_positive",
        "storage_observations",
        "sharing",
        "creation_positive",
    } - raw.keys()
    if missing:
        raise ProfileInvalid(f"missing field(s): {', '.join(sorted(missing))}")

    observations = []
    for i, entry in enumerate(raw["storage_observations"]):
        try:
            observations.append(
                StorageObservation(at=parse_utc(entry["at"]), level=float(entry["level"]))
            )
        except (KeyError, TypeError, ValueError, ParseError) as exc:
            raise ProfileInvalid(f"storage_observations[{i}]: {exc}")

    unbounded = set()
    for marker in raw.get("unbounded", []):
        try:
            unbounded.add(Ability(marker))
        except ValueError:
            raise ProfileInvalid(f"unknown unbounded marker {marker!r}")

    profile = CapabilityProfile(
        subject_ref=raw["subject_ref"],
        input_positive=bool(raw["input_positive"]),
        output_positive=bool(raw["output_positive"]),
        storage_observations=tuple(observations),
        sharing=bool(raw["sharing"]),
        creation_positive=bool(raw["creation_positive"]),
        unbounded=frozenset(unbounded),
        evidence_notes=dict(raw.get("evidence_notes", {})),
    )
    validate_profile(profile)
    return profile


def profile_to_dict(profile: CapabilityProfile) -> dict[str, Any]:
    return {
        "creation_positive": profile.creation_positive,
        "evidence_notes": dict(sorted(profile.evidence_notes.items())),
        "input_positive": profile.input_positive,
        "output_positive": profile.output_positive,
        "sharing": profile.sharing,
        "storage_observations": [
            {"at": isoformat_utc(obs.at), "level": obs.level}
            for obs in profile.storage_observations
        ],
        "subject_ref": profile.subject_ref,
        "unbounded": sorted(a.value for a in profile.unbounded),
    }


def load_profile(path: str | Path) -> CapabilityProfile:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path.name}: invalid JSON at line {exc.lineno}: {exc.msg}")
    return profile_from_dict(raw)


def grade_result_to_dict(result: GradeResult) -> dict[str, Any]:
    return {
        "degenerate": result.degenerate,
        "grade": result.grade,
        "matched_conditions": list(result.matched_conditions),
        "next_grade_gaps": list(result.next_grade_gaps),
    }


def packaged_profiles_dir() -> Path:
    return Path(__file__).parent / "data" / "profiles"


def list_packaged_profiles() -> list[tuple[str, CapabilityProfile]]:
    out = []
    for path in sorted(packaged_profiles_dir().glob("*.json")):
        out.append((path.stem, load_profile(path)))
    return out
