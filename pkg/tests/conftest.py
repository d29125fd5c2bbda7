from __future__ import annotations

import json
import threading
import time
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from aiq.adapters import AdapterConfig, AdapterKind
from aiq.administration import SessionStore, Subject, SubjectCategory
from aiq.battery import (
    Ability,
    Battery,
    ExactMatch,
    HumanRubric,
    KeywordRubric,
    Modality,
    NumericAnswer,
    Prompt,
    Subtest,
    TestItem,
    WeightVector,
)
from aiq.timeutil import TickingClock


# ---------------------------------------------------------------------------
# Battery builders
# ---------------------------------------------------------------------------


def make_item(item_id: str, prompt: str, scoring, max_points: float = 4.0) -> TestItem:
    return TestItem(
        id=item_id,
        prompt=Prompt(modality=Modality.TEXT, content=prompt),
        max_points=max_points,
        scoring=scoring,
    )


def make_battery(subtest_specs, *, battery_id="test-battery", version="v1",
                 weights=None) -> Battery:
    """subtest_specs: list of (subtest_id, ability, [items])."""
    subtests = []
    for subtest_id, ability, items in subtest_specs:
        subtests.append(
            Subtest(
                id=subtest_id,
                ability=ability,
                title=subtest_id,
                items=tuple(items),
                max_points=sum(i.max_points for i in items),
            )
        )
    return Battery(
        id=battery_id,
        version=version,
        weights=weights or WeightVector(0.25, 0.25, 0.25, 0.25),
        subtests=tuple(subtests),
    )


@pytest.fixture
def tiny_battery() -> Battery:
    """One exact-match subtest per ability; answer key = prompt reversed."""
    return make_battery([
        ("st-in", Ability.INPUT, [
            make_item("q-in-1", "say alpha", ExactMatch(("alpha",))),
            make_item("q-in-2", "say beta", ExactMatch(("beta",))),
        ]),
        ("st-out", Ability.OUTPUT, [
            make_item("q-out-1", "say gamma", ExactMatch(("gamma",))),
        ]),
        ("st-mas", Ability.MASTERY, [
            make_item("q-mas-1", "what is 2+2", NumericAnswer(4, 0)),
            make_item("q-mas-2", "what is 10/4", NumericAnswer(2.5, 0.01)),
        ]),
        ("st-cre", Ability.CREATION, [
            make_item("q-cre-1", "mention a hive", KeywordRubric({"hive": 2, "bee": 2}, cap=4)),
        ]),
    ])


def rubric_battery(n_rubric_items: int = 3) -> Battery:
    """Machine-scorable I/O/mastery plus n human-rubric creation items."""
    rubric_items = [
        make_item(
            f"q-cre-{i}",
            f"invent something, round {i}",
            HumanRubric(rubric="2 points per genuinely novel element, up to 6"),
            max_points=6.0,
        )
        for i in range(1, n_rubric_items + 1)
    ]
    return make_battery([
        ("st-in", Ability.INPUT, [make_item("q-in-1", "say alpha", ExactMatch(("alpha",)))]),
        ("st-out", Ability.OUTPUT, [make_item("q-out-1", "say gamma", ExactMatch(("gamma",)))]),
        ("st-mas", Ability.MASTERY, [make_item("q-mas-1", "what is 2+2", NumericAnswer(4, 0))]),
        ("st-cre", Ability.CREATION, rubric_items),
    ], battery_id="rubric-battery")


# ---------------------------------------------------------------------------
# Store and clock
# ---------------------------------------------------------------------------


@pytest.fixture
def store(tmp_path) -> SessionStore:
    return SessionStore(tmp_path / "store")


@pytest.fixture
def clock() -> TickingClock:
    return TickingClock(datetime(2026, 3, 1, 12, 0, 0, tzinfo=timezone.utc), step_seconds=1.0)


@pytest.fixture
def subject(store) -> Subject:
    s = Subject(id="subj-1", display_name="Stub System", category=SubjectCategory.ARTIFICIAL_SYSTEM)
    store.add_subject(s)
    return s


# ---------------------------------------------------------------------------
# Scripted HTTP subject stub
# ---------------------------------------------------------------------------


class _StubHandler(BaseHTTPRequestHandler):
    def log_message(self, *args):
        pass

    def do_GET(self):
        self.send_response(200)
        self.send_header("Content-Length", "2")
        self.end_headers()
        self.wfile.write(b"ok")

    def do_POST(self):
        length = int(self.headers.get("Content-Length") or 0)
        body = json.loads(self.rfile.read(length).decode("utf-8"))
        prompt = body.get("prompt", "")
        server = self.server
        if server.delay:
            time.sleep(server.delay)
        if prompt in server.refusals:
            self.send_response(403)
            self.send_header("Content-Length", "0")
            self.end_headers()
            return
        answer = server.answers.get(prompt, prompt if server.echo else "")
        payload = json.dumps({"response": answer}).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)


class StubSubject(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, answers=None, echo=True, delay=0.0, refusals=()):
        super().__init__(("127.0.0.1", 0), _StubHandler)
        self.answers = dict(answers or {})
        self.echo = echo
        self.delay = delay
        self.refusals = set(refusals)

    @property
    def endpoint(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}/"


@pytest.fixture
def stub_subject():
    """Factory for scripted HTTP subjects; servers are torn down after the test."""
    servers = []

    def make(answers=None, echo=True, delay=0.0, refusals=()) -> StubSubject:
        server = StubSubject(answers=answers, echo=echo, delay=delay, refusals=refusals)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        servers.append(server)
        return server

    yield make
    for server in servers:
        server.shutdown()
        server.server_close()


def http_adapter(server: StubSubject, timeout: float = 5.0, **kwargs) -> AdapterConfig:
    return AdapterConfig(
        kind=AdapterKind.HTTP_JSON, endpoint=server.endpoint, timeout=timeout, **kwargs
    )
