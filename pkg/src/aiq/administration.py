"""Session lifecycle and the file-backed store.

One store directory holds the subject registry, battery files, and one
canonical JSON file per session plus an index. Sessions are persisted
after every administered item so an interrupted run resumes exactly where
it stopped. One writer per session, enforced with a file lock.
"""

from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Callable

from filelock import FileLock

from .adapters import (
    AdapterConfig,
    ResponseOutcome,
    ResponseRecord,
    adapter_config_from_dict,
    adapter_config_to_dict,
    administer_item,
)
from .battery import Battery, HumanRubric, load_battery, save_battery, validate_battery
from .errors import (
    InvalidBattery,
    NotPending,
    OutOfRange,
    ParseError,
    SessionAborted,
    StoreWriteError,
    SubjectExists,
    UnknownItem,
    UnknownSession,
    UnknownSubject,
)
from .scoring import ItemScore, ScoreMethod, score_item
from .timeutil import isoformat_utc, parse_utc, utc_now


class SubjectCategory(str, Enum):
    HUMAN = "human"
    ARTIFICIAL_SYSTEM = "artificial_system"


@dataclass(frozen=True)
class Subject:
    id: str
    display_name: str
    category: SubjectCategory
    region: str | None = None
    vintage: int | None = None


class SessionStatus(str, Enum):
    CREATED = "created"
    RUNNING = "running"
    AWAITING_GRADES = "awaiting_grades"
    COMPLETE = "complete"
    ABORTED = "aborted"


@dataclass(frozen=True)
class BatteryRef:
    id: str
    version: str


@dataclass
class Session:
    """One administration of one battery to one subject via one adapter."""

    id: str
    battery_ref: BatteryRef
    subject_ref: str
    adapter: AdapterConfig
    status: SessionStatus = SessionStatus.CREATED
    started_at: datetime | None = None
    finished_at: datetime | None = None
    responses: dict[str, ResponseRecord] = field(default_factory=dict)
    item_scores: dict[str, ItemScore] = field(default_factory=dict)

    def pending_item_ids(self, battery: Battery) -> list[str]:
        """Administered human-rubric items still waiting for a grade."""
        pending = []
        for _, item in battery.iter_items():
            if not isinstance(item.scoring, HumanRubric):
                continue
            if item.id in self.responses and item.id not in self.item_scores:
                pending.append(item.id)
        return pending


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def canonical_dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def subject_to_dict(subject: Subject) -> dict[str, Any]:
    return {
        "category": subject.category.value,
        "display_name": subject.display_name,
        "id": subject.id,
        "region": subject.region,
        "vintage": subject.vintage,
    }


def subject_from_dict(raw: dict[str, Any]) -> Subject:
    try:
        return Subject(
            id=raw["id"],
            display_name=raw["display_name"],
            category=SubjectCategory(raw["category"]),
            region=raw.get("region"),
            vintage=raw.get("vintage"),
        )
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad subject record: {exc}")


def _response_to_dict(rec: ResponseRecord) -> dict[str, Any]:
    return {
        "detail": rec.detail,
        "item_id": rec.item_id,
        "latency": rec.latency,
        "outcome": rec.outcome.value,
        "raw_response": rec.raw_response,
        "received_at": isoformat_utc(rec.received_at),
    }


def _response_from_dict(raw: dict[str, Any]) -> ResponseRecord:
    return ResponseRecord(
        item_id=raw["item_id"],
        raw_response=raw["raw_response"],
        latency=raw["latency"],
        outcome=ResponseOutcome(raw["outcome"]),
        received_at=parse_utc(raw["received_at"]),
        detail=raw.get("detail", ""),
    )


def _score_to_dict(score: ItemScore) -> dict[str, Any]:
    return {
        "auto_zero": score.auto_zero,
        "grader_id": score.grader_id,
        "item_id": score.item_id,
        "method": score.method.value,
        "points": score.points,
        "scored_at": isoformat_utc(score.scored_at),
    }


def _score_from_dict(raw: dict[str, Any]) -> ItemScore:
    return ItemScore(
        item_id=raw["item_id"],
        points=raw["points"],
        method=ScoreMethod(raw["method"]),
        scored_at=parse_utc(raw["scored_at"]),
        auto_zero=raw["auto_zero"],
        grader_id=raw.get("grader_id"),
    )


def session_to_dict(session: Session) -> dict[str, Any]:
    return {
        "adapter": adapter_config_to_dict(session.adapter),
        "battery_ref": {"id": session.battery_ref.id, "version": session.battery_ref.version},
        "finished_at": None if session.finished_at is None else isoformat_utc(session.finished_at),
        "id": session.id,
        "item_scores": {k: _score_to_dict(v) for k, v in sorted(session.item_scores.items())},
        "responses": {k: _response_to_dict(v) for k, v in sorted(session.responses.items())},
        "started_at": None if session.started_at is None else isoformat_utc(session.started_at),
        "status": session.status.value,
        "subject_ref": session.subject_ref,
    }


def session_from_dict(raw: dict[str, Any]) -> Session:
    try:
        return Session(
            id=raw["id"],
            battery_ref=BatteryRef(id=raw["battery_ref"]["id"], version=raw["battery_ref"]["version"]),
            subject_ref=raw["subject_ref"],
            adapter=adapter_config_from_dict(raw["adapter"]),
            status=SessionStatus(raw["status"]),
            started_at=None if raw["started_at"] is None else parse_utc(raw["started_at"]),
            finished_at=None if raw["finished_at"] is None else parse_utc(raw["finished_at"]),
            responses={k: _response_from_dict(v) for k, v in raw["responses"].items()},
            item_scores={k: _score_from_dict(v) for k, v in raw["item_scores"].items()},
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad session record: {exc.__class__.__name__}: {exc}")


# ---------------------------------------------------------------------------
# Store
# ---------------------------------------------------------------------------


class SessionStore:
    """File layout: subjects.json, batteries/<id>-<version>.json,
    sessions/<id>.json, sessions/index.json."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    @property
    def subjects_path(self) -> Path:
        return self.root / "subjects.json"

    @property
    def sessions_dir(self) -> Path:
        return self.root / "sessions"

    @property
    def batteries_dir(self) -> Path:
        return self.root / "batteries"

    @property
    def index_path(self) -> Path:
        return self.sessions_dir / "index.json"

    def _write(self, path: Path, text: str) -> Path:
        tmp = path.with_suffix(path.suffix + ".tmp")
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp.write_text(text, encoding="utf-8")
            tmp.replace(path)
        except OSError as exc:
            raise StoreWriteError(f"cannot write {path}: {exc}")
        return path

    # -- subjects ---------------------------------------------------------

    def list_subjects(self) -> list[Subject]:
        if not self.subjects_path.exists():
            return []
        try:
            raw = json.loads(self.subjects_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"subjects.json: invalid JSON at line {exc.lineno}")
        return [subject_from_dict(s) for s in raw.get("subjects", [])]

    def subject_registry(self) -> dict[str, Subject]:
        return {s.id: s for s in self.list_subjects()}

    def get_subject(self, subject_id: str) -> Subject:
        registry = self.subject_registry()
        if subject_id not in registry:
            raise UnknownSubject(f"subject {subject_id!r} is not registered")
        return registry[subject_id]

    def add_subject(self, subject: Subject) -> None:
        subjects = self.list_subjects()
        if any(s.id == subject.id for s in subjects):
            raise SubjectExists(f"subject {subject.id!r} already registered")
        subjects.append(subject)
        subjects.sort(key=lambda s: s.id)
        self._write(
            self.subjects_path,
            canonical_dumps({"subjects": [subject_to_dict(s) for s in subjects]}),
        )

    # -- batteries --------------------------------------------------------

    def battery_path(self, battery_id: str, version: str) -> Path:
        return self.batteries_dir / f"{battery_id}-{version}.json"

    def put_battery(self, battery: Battery) -> Path:
        path = self.battery_path(battery.id, battery.version)
        path.parent.mkdir(parents=True, exist_ok=True)
        return save_battery(battery, path)

    def get_battery(self, ref: BatteryRef) -> Battery:
        path = self.battery_path(ref.id, ref.version)
        if not path.exists():
            raise ParseError(
                f"unresolved battery reference {ref.id}-{ref.version}: {path} missing"
            )
        return load_battery(path)

    # -- sessions ---------------------------------------------------------

    def session_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.json"

    def session_lock(self, session_id: str) -> FileLock:
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        return FileLock(str(self.sessions_dir / f"{session_id}.lock"), timeout=30)

    def save_session(self, session: Session) -> Path:
        path = self._write(self.session_path(session.id), canonical_dumps(session_to_dict(session)))
        self._update_index(session)
        return path

    def _update_index(self, session: Session) -> None:
        index: dict[str, Any] = {"sessions": {}}
        if self.index_path.exists():
            try:
                index = json.loads(self.index_path.read_text(encoding="utf-8"))
            except json.JSONDecodeError:
                index = {"sessions": {}}
        index.setdefault("sessions", {})[session.id] = {
            "battery_id": session.battery_ref.id,
            "battery_version": session.battery_ref.version,
            "finished_at": None if session.finished_at is None else isoformat_utc(session.finished_at),
            "started_at": None if session.started_at is None else isoformat_utc(session.started_at),
            "status": session.status.value,
            "subject_ref": session.subject_ref,
        }
        self._write(self.index_path, canonical_dumps(index))

    def list_sessions(self) -> list[dict[str, Any]]:
        if not self.index_path.exists():
            return []
        raw = json.loads(self.index_path.read_text(encoding="utf-8"))
        out = []
        for session_id, summary in sorted(raw.get("sessions", {}).items()):
            out.append({"id": session_id, **summary})
        return out

    def load_session(self, session_id: str) -> Session:
        path = self.session_path(session_id)
        if not path.exists():
            raise UnknownSession(f"no session {session_id!r} in store")
        return self.load_session_file(path)

    def load_session_file(self, path: str | Path) -> Session:
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path.name}: invalid JSON at line {exc.lineno}: {exc.msg}")
        session = session_from_dict(raw)
        battery = self.get_battery(session.battery_ref)
        _check_session_against_battery(session, battery)
        # Deterministic in-memory ordering: battery order.
        ordered_ids = [i for i in battery.item_ids() if i in session.responses]
        session.responses = {i: session.responses[i] for i in ordered_ids}
        session.item_scores = {
            i: session.item_scores[i] for i in battery.item_ids() if i in session.item_scores
        }
        return session


def _check_session_against_battery(session: Session, battery: Battery) -> None:
    known = set(battery.item_ids())
    for item_id in session.responses:
        if item_id not in known:
            raise ParseError(
                f"session {session.id}: response for unknown item {item_id!r}"
            )
    for item_id in session.item_scores:
        if item_id not in known:
            raise ParseError(f"session {session.id}: score for unknown item {item_id!r}")

    if session.status == SessionStatus.ABORTED:
        return
    all_ids = battery.item_ids()
    fully_scored = all(i in session.item_scores for i in all_ids)
    all_administered = all(i in session.responses for i in all_ids)
    pending = session.pending_item_ids(battery)
    if session.status == SessionStatus.COMPLETE and not fully_scored:
        raise ParseError(f"session {session.id}: complete status with unscored items")
    if session.status == SessionStatus.AWAITING_GRADES and not (all_administered and pending):
        raise ParseError(f"session {session.id}: awaiting_grades status inconsistent")


def save_session(store: SessionStore, session: Session) -> Path:
    return store.save_session(session)


def load_session(store: SessionStore, path: str | Path) -> Session:
    return store.load_session_file(path)


# ---------------------------------------------------------------------------
# Lifecycle operations
# ---------------------------------------------------------------------------


def new_session_id() -> str:
    return "s-" + uuid.uuid4().hex[:12]


def start_session(
    store: SessionStore,
    battery: Battery,
    subject_id: str,
    adapter: AdapterConfig,
    *,
    session_id: str | None = None,
    clock: Callable[[], datetime] | None = None,
) -> Session:
    """Create and persist a session in Created status."""
    violations = validate_battery(battery)
    if violations:
        raise InvalidBattery(
            "; ".join(f"{v.code} at {v.location}" for v in violations)
        )
    store.get_subject(subject_id)
    adapter.validate()
    store.put_battery(battery)
    session = Session(
        id=session_id if session_id is not None else new_session_id(),
        battery_ref=BatteryRef(id=battery.id, version=battery.version),
        subject_ref=subject_id,
        adapter=adapter,
        status=SessionStatus.CREATED,
    )
    store.save_session(session)
    return session


def run_session(
    store: SessionStore,
    session: Session,
    *,
    clock: Callable[[], datetime] | None = None,
    input_fn: Callable[[], str] | None = None,
    output_fn: Callable[[str], None] | None = None,
    sleep_fn: Callable[[float], None] = time.sleep,
) -> Session:
    """Administer every remaining item in battery order.

    Already-answered items are skipped, and the session file is rewritten
    after each item, so a killed run resumes with identical results.
    """
    if clock is None:
        clock = utc_now
    if session.status in (SessionStatus.COMPLETE, SessionStatus.AWAITING_GRADES):
        return session
    if session.status == SessionStatus.ABORTED:
        raise SessionAborted(f"session {session.id} was aborted")

    battery = store.get_battery(session.battery_ref)
    cfg = session.adapter
    cfg.validate()

    with store.session_lock(session.id):
        if session.status == SessionStatus.CREATED:
            session.status = SessionStatus.RUNNING
            session.started_at = clock()
            store.save_session(session)

        administered_any = False
        for _, item in battery.iter_items():
            if item.id in session.responses:
                continue
            if administered_any and cfg.inter_item_delay > 0:
                sleep_fn(cfg.inter_item_delay)
            record = administer_item(
                cfg, item, clock=clock, input_fn=input_fn, output_fn=output_fn
            )
            session.responses[item.id] = record
            scored = score_item(item, record, clock=clock)
            if isinstance(scored, ItemScore):
                session.item_scores[item.id] = scored
            administered_any = True
            store.save_session(session)

        if session.pending_item_ids(battery):
            session.status = SessionStatus.AWAITING_GRADES
        else:
            session.status = SessionStatus.COMPLETE
            session.finished_at = clock()
        store.save_session(session)
    return session


def record_manual_score(
    store: SessionStore,
    session_id: str,
    item_id: str,
    points: float,
    grader_id: str,
    *,
    clock: Callable[[], datetime] | None = None,
) -> Session:
    """Record a human grade for one pending rubric item.

    When the last pending item is scored the session flips to Complete.
    Serialized by the session writer lock; persisted atomically.
    """
    if clock is None:
        clock = utc_now
    with store.session_lock(session_id):
        session = store.load_session(session_id)
        battery = store.get_battery(session.battery_ref)
        item = battery.find_item(item_id)
        if item is None:
            raise UnknownItem(f"item {item_id!r} is not in battery {battery.id}")
        pending = set(session.pending_item_ids(battery))
        if item_id not in pending:
            raise NotPending(f"item {item_id!r} is not awaiting a grade")
        if not (0 <= points <= item.max_points):
            raise OutOfRange(
                f"points {points!r} outside [0, {item.max_points:g}] for item {item_id!r}"
            )
        session.item_scores[item_id] = ItemScore(
            item_id=item_id,
            points=float(points),
            method=ScoreMethod.MANUAL,
            scored_at=clock(),
            grader_id=grader_id,
        )
        if not session.pending_item_ids(battery) and session.status == SessionStatus.AWAITING_GRADES:
            session.status = SessionStatus.COMPLETE
            session.finished_at = clock()
        store.save_session(session)
    return session


def abort_session(
    store: SessionStore,
    session_id: str,
    *,
    clock: Callable[[], datetime] | None = None,
) -> Session:
    if clock is None:
        clock = utc_now
    with store.session_lock(session_id):
        session = store.load_session(session_id)
        if session.status in (SessionStatus.COMPLETE, SessionStatus.ABORTED):
            return session
        session.status = SessionStatus.ABORTED
        session.finished_at = clock()
        store.save_session(session)
    return session
