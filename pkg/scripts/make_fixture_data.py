"""Regenerate packaged capability profiles and ranking fixture files.

Profiles: the seven canonical reference points for the grade classifier,
one per grade. Ranking fixtures: the published 2014 and 2016 IQ catalogs,
stored as fixture results (the underlying question banks were never
published, so these values are pinned, not recomputed).

Fixture subject ids for the 2014 catalog are numbered in printed catalog
order so the documented id tie-break reproduces the printed order for the
23.5/23.5 pair and the 18.0 triple.
"""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path

from aiq.administration import Subject, SubjectCategory, canonical_dumps, subject_to_dict
from aiq.battery import Ability, WeightVector
from aiq.grading import CapabilityProfile, StorageObservation, profile_to_dict
from aiq.scoring import AbilityScores, IQResult, iq_result_to_dict

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "aiq" / "data"

T0 = datetime(2015, 1, 1, tzinfo=timezone.utc)
T1 = datetime(2016, 1, 1, tzinfo=timezone.utc)
T2 = datetime(2016, 6, 1, tzinfo=timezone.utc)


def obs(points: list[tuple[datetime, float]]) -> tuple[StorageObservation, ...]:
    return tuple(StorageObservation(at=t, level=v) for t, v in points)


PROFILES = {
    "sensor": CapabilityProfile(
        subject_ref="bare-sensor",
        input_positive=True,
        output_positive=False,
        storage_observations=(),
        sharing=False,
        creation_positive=False,
        evidence_notes={
            "input": "registers light levels",
            "output": "no channel back to the tester",
        },
    ),
    "stone": CapabilityProfile(
        subject_ref="stone",
        input_positive=False,
        output_positive=False,
        storage_observations=(),
        sharing=False,
        creation_positive=False,
        evidence_notes={"io": "inert to testers; a black box"},
    ),
    "washing-machine": CapabilityProfile(
        subject_ref="washing-machine",
        input_positive=True,
        output_positive=True,
        storage_observations=obs([(T0, 5.0), (T1, 5.0), (T2, 5.0)]),
        sharing=False,
        creation_positive=False,
        evidence_notes={
            "storage": "program memory never changes after leaving the factory",
        },
    ),
    "alphago": CapabilityProfile(
        subject_ref="alphago",
        input_positive=True,
        output_positive=True,
        storage_observations=obs([(T0, 40.0), (T1, 55.0), (T2, 72.0)]),
        sharing=False,
        creation_positive=False,
        evidence_notes={
            "storage": "strategy model retrained and upgraded between public matches",
            "sharing": "not open to online challengers; knowledge stays internal",
            "creation": "play follows human-set rules and training; judged non-creative",
        },
    ),
    "cloud-robot": CapabilityProfile(
        subject_ref="cloud-robot",
        input_positive=True,
        output_positive=True,
        storage_observations=obs([(T0, 10.0), (T1, 30.0), (T2, 45.0)]),
        sharing=True,
        creation_positive=False,
        evidence_notes={"sharing": "fleet knowledge base shared over the network"},
    ),
    "human": CapabilityProfile(
        subject_ref="adult-human",
        input_positive=True,
        output_positive=True,
        storage_observations=obs([(T0, 60.0), (T1, 65.0), (T2, 70.0)]),
        sharing=True,
        creation_positive=True,
        evidence_notes={"creation": "produces genuinely new knowledge"},
    ),
    "unbounded-system": CapabilityProfile(
        subject_ref="unbounded-system",
        input_positive=True,
        output_positive=True,
        storage_observations=obs([(T0, 10.0), (T1, 100.0), (T2, 1000.0)]),
        sharing=True,
        creation_positive=True,
        unbounded=frozenset(Ability),
        evidence_notes={"all": "declared to grow without bound on every channel"},
    ),
}


EQUAL = WeightVector(0.25, 0.25, 0.25, 0.25)

# Published catalogs: (subject id, display name, region column, Q).
CATALOG_2014 = [
    ("hum2014-01-18y", "Human (18 years old)", None, 97.0),
    ("hum2014-02-12y", "Human (12 years old)", None, 84.5),
    ("hum2014-03-06y", "Human (6 years old)", None, 55.5),
    ("se2014-04-google", "Google", "America/America", 26.5),
    ("se2014-05-baidu", "Baidu", "Asia/China", 23.5),
    ("se2014-06-so", "so", "Asia/China", 23.5),
    ("se2014-07-sogou", "Sogou", "Asia/China", 22.0),
    ("se2014-08-yell", "yell", "Africa/Egypt", 20.5),
    ("se2014-09-yandex", "Yandex", "Europe/Russia", 19.0),
    ("se2014-10-ramber", "ramber", "Europe/Russia", 18.0),
    ("se2014-11-his", "His", "Europe/Spain", 18.0),
    ("se2014-12-seznam", "seznam", "Europe/Czech", 18.0),
    ("se2014-13-clix", "clix", "Europe/Portugal", 16.5),
]

CATALOG_2016 = [
    ("human-18", "Human (18 years old)", "2014", 97.0),
    ("human-12", "Human (12 years old)", "2014", 84.5),
    ("human-06", "Human (6 years old)", "2014", 55.5),
    ("google", "Google", "America/America", 47.28),
    ("duer", "duer", "Asia/China", 37.2),
    ("baidu", "Baidu", "Asia/China", 32.92),
    ("sogou", "Sogou", "Asia/China", 32.25),
    ("bing", "Bing", "America/America", 31.98),
    ("xiaobing", "Microsoft's Xiaobing", "America/America", 24.48),
    ("siri", "SIRI", "America/America", 23.94),
]


def fixture_payload(catalog, vintage: int, as_of: datetime) -> dict:
    subjects = []
    results = []
    for subject_id, name, region, q in catalog:
        category = SubjectCategory.HUMAN if "uman" in name else SubjectCategory.ARTIFICIAL_SYSTEM
        subjects.append(
            subject_to_dict(
                Subject(
                    id=subject_id,
                    display_name=name,
                    category=category,
                    region=region,
                    vintage=vintage,
                )
            )
        )
        # Pinned catalog value: all four ability scores set to Q so the
        # linear-blend invariant holds without inventing a decomposition.
        results.append(
            iq_result_to_dict(
                IQResult(
                    subject_ref=subject_id,
                    session_ref=f"catalog-{vintage}",
                    q=q,
                    weights=EQUAL,
                    ability_scores=AbilityScores(q, q, q, q),
                    computed_at=as_of,
                )
            )
        )
    return {"subjects": subjects, "results": results}


def main() -> None:
    profiles_dir = DATA_DIR / "profiles"
    profiles_dir.mkdir(parents=True, exist_ok=True)
    for name, profile in PROFILES.items():
        path = profiles_dir / f"{name}.json"
        path.write_text(canonical_dumps(profile_to_dict(profile)), encoding="utf-8")
        print(f"wrote {path}")

    fixtures_dir = DATA_DIR / "fixtures"
    fixtures_dir.mkdir(parents=True, exist_ok=True)
    table1 = fixture_payload(CATALOG_2014, 2014, datetime(2014, 12, 31, tzinfo=timezone.utc))
    (fixtures_dir / "ranking_2014.json").write_text(canonical_dumps(table1), encoding="utf-8")
    table2 = fixture_payload(CATALOG_2016, 2016, datetime(2016, 12, 31, tzinfo=timezone.utc))
    (fixtures_dir / "ranking_2016.json").write_text(canonical_dumps(table2), encoding="utf-8")
    print(f"wrote {fixtures_dir / 'ranking_2014.json'}")
    print(f"wrote {fixtures_dir / 'ranking_2016.json'}")


if __name__ == "__main__":
    main()
