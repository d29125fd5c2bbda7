"""Local HTTP API for the grader console.

Loopback-bound, unauthenticated, stateless above the store: every request
reads or mutates store files directly, so restarting the service loses
nothing. Score submissions funnel through the per-session writer lock.
"""

from __future__ import annotations

import json
import re
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any

from .administration import (
    Session,
    SessionStatus,
    SessionStore,
    record_manual_score,
    session_to_dict,
)
from .battery import HumanRubric
from .errors import (
    DomainError,
    NotPending,
    OutOfRange,
    ProfileInvalid,
    StoreWriteError,
    UnknownItem,
    UnknownSession,
    UnknownSubject,
)
from .grading import (
    classify_grade,
    grade_result_to_dict,
    list_packaged_profiles,
    profile_from_dict,
    profile_to_dict,
)
from .reporting import rank_report
from .scoring import format_q, provisional_iq, session_iq
from .timeutil import isoformat_utc

_SESSION_ROUTE = re.compile(r"^/api/sessions/([^/]+)$")
_QUEUE_ROUTE = re.compile(r"^/api/sessions/([^/]+)/queue$")
_SCORES_ROUTE = re.compile(r"^/api/sessions/([^/]+)/scores$")

_STATUS_FOR_ERROR = {
    UnknownSession: 404,
    UnknownSubject: 404,
    UnknownItem: 404,
    NotPending: 409,
    OutOfRange: 422,
    ProfileInvalid: 422,
    StoreWriteError: 500,
}


class ApiError(Exception):
    def __init__(self, http_status: int, code: str, message: str):
        super().__init__(message)
        self.http_status = http_status
        self.code = code
        self.message = message


def _api_error_for(exc: DomainError) -> ApiError:
    status = _STATUS_FOR_ERROR.get(type(exc), 400)
    code_parts = exc.code.split("_")
    code = "".join(part.capitalize() for part in code_parts)
    return ApiError(status, code, exc.message)


class AiqApiServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, store: SessionStore, assets_dir: Path | None = None):
        super().__init__(address, AiqRequestHandler)
        self.store = store
        self.assets_dir = assets_dir


class AiqRequestHandler(BaseHTTPRequestHandler):
    server: AiqApiServer

    # -- plumbing ----------------------------------------------------------

    def log_message(self, format: str, *args: Any) -> None:
        pass  # keep test output quiet; errors surface in responses

    def _send_json(self, status: int, payload: Any) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_error_json(self, err: ApiError) -> None:
        self._send_json(
            err.http_status,
            {"error": {"code": err.code, "message": err.message}},
        )

    def _read_json_body(self) -> Any:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            raise ApiError(400, "BadRequest", "request body required")
        try:
            return json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ApiError(400, "BadRequest", f"body is not valid JSON: {exc}")

    # -- routing -----------------------------------------------------------

    def do_GET(self) -> None:
        self._dispatch("GET")

    def do_POST(self) -> None:
        self._dispatch("POST")

    def _dispatch(self, method: str) -> None:
        try:
            handled = self._route(method, self.path.split("?", 1)[0])
            if not handled:
                raise ApiError(404, "NotFound", f"no route for {method} {self.path}")
        except ApiError as err:
            self._send_error_json(err)
        except DomainError as exc:
            self._send_error_json(_api_error_for(exc))
        except Exception as exc:  # noqa: BLE001 - last-resort surface
            self._send_error_json(ApiError(500, "InternalError", str(exc)))

    def _route(self, method: str, path: str) -> bool:
        store = self.server.store
        if method == "GET" and path == "/api/sessions":
            self._send_json(200, {"sessions": _session_summaries(store)})
            return True

        match = _SESSION_ROUTE.match(path)
        if method == "GET" and match:
            session = store.load_session(match.group(1))
            self._send_json(200, session_to_dict(session))
            return True

        match = _QUEUE_ROUTE.match(path)
        if method == "GET" and match:
            self._send_json(200, _queue_payload(store, match.group(1)))
            return True

        match = _SCORES_ROUTE.match(path)
        if method == "POST" and match:
            self._send_json(200, _submit_score(store, match.group(1), self._read_json_body()))
            return True

        if method == "GET" and path == "/api/reports/rank":
            self._send_json(200, _rank_payload(store))
            return True

        if method == "GET" and path == "/api/profiles":
            payload = [
                {"name": name, "profile": profile_to_dict(profile)}
                for name, profile in list_packaged_profiles()
            ]
            self._send_json(200, {"profiles": payload})
            return True

        if method == "POST" and path == "/api/profiles/classify":
            body = self._read_json_body()
            eps = 0.0
            if isinstance(body, dict) and "eps" in body:
                eps = float(body.pop("eps"))
            profile = profile_from_dict(body)
            result = classify_grade(profile, eps=eps)
            self._send_json(200, grade_result_to_dict(result))
            return True

        if method == "GET":
            return self._serve_static(path)
        return False

    # -- static assets -----------------------------------------------------

    def _serve_static(self, path: str) -> bool:
        assets = self.server.assets_dir
        if assets is None:
            if path == "/":
                self._send_json(200, {"service": "aiq", "api": "/api"})
                return True
            return False
        relative = path.lstrip("/") or "index.html"
        target = (assets / relative).resolve()
        if not str(target).startswith(str(assets.resolve())) or not target.is_file():
            return False
        content_types = {
            ".html": "text/html; charset=utf-8",
            ".js": "text/javascript; charset=utf-8",
            ".css": "text/css; charset=utf-8",
            ".json": "application/json; charset=utf-8",
            ".svg": "image/svg+xml",
        }
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", content_types.get(target.suffix, "application/octet-stream"))
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)
        return True


# ---------------------------------------------------------------------------
# Payload builders
# ---------------------------------------------------------------------------


def _session_summaries(store: SessionStore) -> list[dict[str, Any]]:
    registry = store.subject_registry()
    summaries = []
    for entry in store.list_sessions():
        subject = registry.get(entry["subject_ref"])
        pending = 0
        if entry["status"] == SessionStatus.AWAITING_GRADES.value:
            session = store.load_session(entry["id"])
            battery = store.get_battery(session.battery_ref)
            pending = len(session.pending_item_ids(battery))
        summaries.append(
            {
                **entry,
                "subject_display_name": subject.display_name if subject else entry["subject_ref"],
                "pending_count": pending,
            }
        )
    return summaries


def _queue_payload(store: SessionStore, session_id: str) -> dict[str, Any]:
    session = store.load_session(session_id)
    battery = store.get_battery(session.battery_ref)
    subject = store.subject_registry().get(session.subject_ref)
    items = []
    for item_id in session.pending_item_ids(battery):
        item = battery.find_item(item_id)
        assert item is not None and isinstance(item.scoring, HumanRubric)
        response = session.responses[item_id]
        items.append(
            {
                "item_id": item_id,
                "prompt": item.prompt.content,
                "modality": item.prompt.modality.value,
                "raw_response": response.raw_response,
                "response_outcome": response.outcome.value,
                "rubric": item.scoring.rubric,
                "max_points": item.max_points,
            }
        )
    return {
        "session_id": session.id,
        "subject_id": session.subject_ref,
        "subject_display_name": subject.display_name if subject else session.subject_ref,
        "status": session.status.value,
        "items": items,
    }


def _score_payload(store: SessionStore, session: Session) -> dict[str, Any]:
    battery = store.get_battery(session.battery_ref)
    pending = session.pending_item_ids(battery)
    payload: dict[str, Any] = {
        "session_id": session.id,
        "status": session.status.value,
        "pending_count": len(pending),
        "q_so_far": None,
        "q_display": None,
        "final": session.status == SessionStatus.COMPLETE,
    }
    if session.status == SessionStatus.COMPLETE:
        result = session_iq(session, battery)
        payload["q_so_far"] = result.q
        payload["q_display"] = result.q_display
    else:
        q = provisional_iq(session, battery)
        if q is not None:
            payload["q_so_far"] = q
            payload["q_display"] = format_q(q)
    return payload


def _submit_score(store: SessionStore, session_id: str, body: Any) -> dict[str, Any]:
    if not isinstance(body, dict):
        raise ApiError(400, "BadRequest", "score body must be an object")
    missing = {"item_id", "points", "grader_id"} - body.keys()
    if missing:
        raise ApiError(400, "BadRequest", f"missing field(s): {', '.join(sorted(missing))}")
    if not isinstance(body["points"], (int, float)) or isinstance(body["points"], bool):
        raise ApiError(422, "OutOfRange", "points must be a number")
    session = record_manual_score(
        store, session_id, body["item_id"], float(body["points"]), str(body["grader_id"])
    )
    return _score_payload(store, session)


def _rank_payload(store: SessionStore) -> dict[str, Any]:
    registry = store.subject_registry()
    latest: dict[str, Session] = {}
    for entry in store.list_sessions():
        if entry["status"] != SessionStatus.COMPLETE.value:
            continue
        session = store.load_session(entry["id"])
        current = latest.get(session.subject_ref)
        if current is None or (
            session.finished_at and current.finished_at and session.finished_at > current.finished_at
        ):
            latest[session.subject_ref] = session
    results = [
        session_iq(session, store.get_battery(session.battery_ref))
        for session in latest.values()
    ]
    table = rank_report(results, registry)
    return {
        "as_of": isoformat_utc(table.as_of),
        "rows": [
            {
                "rank": row.rank,
                "subject_id": row.subject_id,
                "display_name": row.display_name,
                "region": row.region,
                "q": row.q,
                "q_display": row.q_display,
            }
            for row in table.rows
        ],
    }


def make_server(
    store: SessionStore,
    port: int = 8177,
    bind: str = "127.0.0.1",
    assets_dir: str | Path | None = None,
) -> AiqApiServer:
    assets = Path(assets_dir) if assets_dir is not None else None
    return AiqApiServer((bind, port), store, assets)
