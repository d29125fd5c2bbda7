"""Adapters connect the framework to subjects under test.

Three transports: an HTTP JSON endpoint, a line-oriented subprocess, and a
human operator transcribing another system's answers. Subject misbehavior
(timeouts, dead connections, refusals) is always encoded in the returned
record, never raised.
"""

from __future__ import annotations

import os
import subprocess
import time
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Any, Callable

import requests

from .battery import Modality, TestItem
from .errors import ConfigInvalid
from .timeutil import utc_now

DEFAULT_TIMEOUT_SECONDS = 30.0
TIMEOUT_ENV_VAR = "AIQ_HTTP_TIMEOUT_MS"


def default_timeout() -> float:
    """Default adapter timeout; AIQ_HTTP_TIMEOUT_MS overrides it."""
    raw = os.environ.get(TIMEOUT_ENV_VAR)
    if raw:
        try:
            return int(raw) / 1000.0
        except ValueError:
            raise ConfigInvalid(f"{TIMEOUT_ENV_VAR} must be an integer, got {raw!r}")
    return DEFAULT_TIMEOUT_SECONDS


class AdapterKind(str, Enum):
    HTTP_JSON = "http_json"
    SUBPROCESS = "subprocess"
    MANUAL_TRANSCRIPT = "manual_transcript"


class ResponseOutcome(str, Enum):
    ANSWERED = "answered"
    TIMEOUT = "timeout"
    TRANSPORT_ERROR = "transport_error"
    REFUSED = "refused"


@dataclass(frozen=True)
class AdapterConfig:
    """Transport configuration; only the fields for its kind may be set."""

    kind: AdapterKind
    endpoint: str | None = None
    command: str | None = None
    args: tuple[str, ...] = ()
    timeout: float = DEFAULT_TIMEOUT_SECONDS
    headers: dict[str, str] = field(default_factory=dict)
    env: dict[str, str] = field(default_factory=dict)
    inter_item_delay: float = 0.0

    def validate(self) -> None:
        if self.timeout <= 0:
            raise ConfigInvalid(f"timeout must be positive, got {self.timeout!r}")
        if self.inter_item_delay < 0:
            raise ConfigInvalid("inter_item_delay must be >= 0")
        if self.kind == AdapterKind.HTTP_JSON:
            if not self.endpoint:
                raise ConfigInvalid("http_json adapter requires an endpoint")
            self._forbid("command", "args", "env")
        elif self.kind == AdapterKind.SUBPROCESS:
            if not self.command:
                raise ConfigInvalid("subprocess adapter requires a command")
            self._forbid("endpoint", "headers")
        elif self.kind == AdapterKind.MANUAL_TRANSCRIPT:
            self._forbid("endpoint", "command", "args", "headers", "env")
        else:  # pragma: no cover - enum is closed
            raise ConfigInvalid(f"unknown adapter kind {self.kind!r}")

    def _forbid(self, *names: str) -> None:
        for name in names:
            if getattr(self, name):
                raise ConfigInvalid(f"{name} is not valid for a {self.kind.value} adapter")


@dataclass(frozen=True)
class ResponseRecord:
    """One subject response (or failure) for one item."""

    item_id: str
    raw_response: str
    latency: float
    outcome: ResponseOutcome
    received_at: datetime
    detail: str = ""


@dataclass(frozen=True)
class HealthReport:
    reachable: bool
    round_trip: float
    detail: str = ""


def render_prompt(item: TestItem) -> str:
    """The single-line payload sent to the subject.

    Media prompts are passed through as their URI; the line protocol cannot
    carry newlines, so embedded newlines are flattened.
    """
    return item.prompt.content.replace("\n", " ")


# ---------------------------------------------------------------------------
# administer_item
# ---------------------------------------------------------------------------


def administer_item(
    cfg: AdapterConfig,
    item: TestItem,
    *,
    clock: Callable[[], datetime] | None = None,
    input_fn: Callable[[], str] | None = None,
    output_fn: Callable[[str], None] | None = None,
) -> ResponseRecord:
    """Send one item to the subject and capture exactly one record.

    Total over well-formed configs: every subject failure maps to an
    outcome. Only a broken config raises.
    """
    cfg.validate()
    if clock is None:
        clock = utc_now
    prompt = render_prompt(item)
    started = time.monotonic()

    if cfg.kind == AdapterKind.HTTP_JSON:
        outcome, text, detail = _http_exchange(cfg, item, prompt)
    elif cfg.kind == AdapterKind.SUBPROCESS:
        outcome, text, detail = _subprocess_exchange(cfg, prompt)
    else:
        outcome, text, detail = _manual_exchange(item, prompt, input_fn, output_fn)

    latency = time.monotonic() - started
    if outcome == ResponseOutcome.ANSWERED:
        latency = min(latency, cfg.timeout)
    return ResponseRecord(
        item_id=item.id,
        raw_response=text if outcome == ResponseOutcome.ANSWERED else "",
        latency=latency,
        outcome=outcome,
        received_at=clock(),
        detail=detail,
    )


def _http_exchange(
    cfg: AdapterConfig, item: TestItem, prompt: str
) -> tuple[ResponseOutcome, str, str]:
    payload = {"item_id": item.id, "prompt": prompt, "modality": item.prompt.modality.value}
    last_detail = ""
    for attempt in (1, 2):  # one retry on transport error, none on timeout
        try:
            reply = requests.post(
                cfg.endpoint,
                json=payload,
                timeout=cfg.timeout,
                headers=dict(cfg.headers),
            )
        except requests.Timeout:
            return ResponseOutcome.TIMEOUT, "", f"no reply within {cfg.timeout:g}s"
        except requests.RequestException as exc:
            last_detail = f"attempt {attempt}: {exc.__class__.__name__}: {exc}"
            continue
        if 200 <= reply.status_code < 300:
            try:
                body = reply.json()
            except ValueError:
                return ResponseOutcome.TRANSPORT_ERROR, "", "response body is not JSON"
            if not isinstance(body, dict) or not isinstance(body.get("response"), str):
                return ResponseOutcome.TRANSPORT_ERROR, "", "missing 'response' string"
            return ResponseOutcome.ANSWERED, body["response"], ""
        # The subject answered the transport but declined the item.
        return ResponseOutcome.REFUSED, "", f"HTTP {reply.status_code}"
    return ResponseOutcome.TRANSPORT_ERROR, "", last_detail


def _subprocess_exchange(cfg: AdapterConfig, prompt: str) -> tuple[ResponseOutcome, str, str]:
    argv = [cfg.command, *cfg.args]
    env = {**os.environ, **cfg.env} if cfg.env else None
    try:
        proc = subprocess.run(
            argv,
            input=prompt + "\n",
            capture_output=True,
            text=True,
            timeout=cfg.timeout,
            env=env,
        )
    except subprocess.TimeoutExpired:
        return ResponseOutcome.TIMEOUT, "", f"no reply within {cfg.timeout:g}s"
    except (FileNotFoundError, PermissionError, OSError) as exc:
        return ResponseOutcome.TRANSPORT_ERROR, "", f"{exc.__class__.__name__}: {exc}"
    lines = proc.stdout.splitlines()
    if not lines:
        return (
            ResponseOutcome.TRANSPORT_ERROR,
            "",
            f"no response line (exit {proc.returncode})",
        )
    return ResponseOutcome.ANSWERED, lines[0], ""


def _manual_exchange(
    item: TestItem,
    prompt: str,
    input_fn: Callable[[], str] | None,
    output_fn: Callable[[str], None] | None,
) -> tuple[ResponseOutcome, str, str]:
    show = output_fn if output_fn is not None else print
    read = input_fn if input_fn is not None else input
    if item.prompt.modality == Modality.TEXT:
        show(f"[{item.id}] {prompt}")
    else:
        show(f"[{item.id}] ({item.prompt.modality.value}) {prompt}")
    show("enter the subject's response (Ctrl-D if the subject refused):")
    try:
        return ResponseOutcome.ANSWERED, read(), ""
    except EOFError:
        return ResponseOutcome.REFUSED, "", "operator marked refusal"


# ---------------------------------------------------------------------------
# probe_subject
# ---------------------------------------------------------------------------


def probe_subject(cfg: AdapterConfig) -> HealthReport:
    """Non-destructive liveness check; never mutates session state."""
    cfg.validate()
    started = time.monotonic()

    if cfg.kind == AdapterKind.HTTP_JSON:
        try:
            reply = requests.get(cfg.endpoint, timeout=cfg.timeout, headers=dict(cfg.headers))
        except requests.RequestException as exc:
            return HealthReport(False, time.monotonic() - started, f"TransportError: {exc}")
        return HealthReport(True, time.monotonic() - started, f"HTTP {reply.status_code}")

    if cfg.kind == AdapterKind.SUBPROCESS:
        env = {**os.environ, **cfg.env} if cfg.env else None
        try:
            subprocess.run(
                [cfg.command, *cfg.args],
                input="",
                capture_output=True,
                text=True,
                timeout=min(cfg.timeout, 5.0),
                env=env,
            )
        except subprocess.TimeoutExpired:
            # It started and kept running; that counts as alive.
            return HealthReport(True, time.monotonic() - started, "process runs (no exit)")
        except (FileNotFoundError, PermissionError, OSError) as exc:
            return HealthReport(False, time.monotonic() - started, f"{exc.__class__.__name__}: {exc}")
        return HealthReport(True, time.monotonic() - started, "process ran")

    return HealthReport(True, 0.0, "operator transport")


# ---------------------------------------------------------------------------
# Config serialization
# ---------------------------------------------------------------------------


def adapter_config_to_dict(cfg: AdapterConfig) -> dict[str, Any]:
    out: dict[str, Any] = {
        "kind": cfg.kind.value,
        "timeout": cfg.timeout,
        "inter_item_delay": cfg.inter_item_delay,
    }
    if cfg.kind == AdapterKind.HTTP_JSON:
        out["endpoint"] = cfg.endpoint
        out["headers"] = dict(sorted(cfg.headers.items()))
    elif cfg.kind == AdapterKind.SUBPROCESS:
        out["command"] = cfg.command
        out["args"] = list(cfg.args)
        out["env"] = dict(sorted(cfg.env.items()))
    return out


def adapter_config_from_dict(raw: dict[str, Any]) -> AdapterConfig:
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ConfigInvalid("adapter config must be an object with a 'kind' field")
    try:
        kind = AdapterKind(raw["kind"])
    except ValueError:
        raise ConfigInvalid(f"unknown adapter kind {raw['kind']!r}")
    allowed = {
        AdapterKind.HTTP_JSON: {"kind", "endpoint", "timeout", "headers", "inter_item_delay"},
        AdapterKind.SUBPROCESS: {"kind", "command", "args", "timeout", "env", "inter_item_delay"},
        AdapterKind.MANUAL_TRANSCRIPT: {"kind", "timeout", "inter_item_delay"},
    }[kind]
    unknown = raw.keys() - allowed
    if unknown:
        raise ConfigInvalid(f"unknown field(s) for {kind.value}: {', '.join(sorted(unknown))}")
    cfg = AdapterConfig(
        kind=kind,
        endpoint=raw.get("endpoint"),
        command=raw.get("command"),
        args=tuple(raw.get("args", ())),
        timeout=raw["timeout"] if "timeout" in raw else default_timeout(),
        headers=dict(raw.get("headers", {})),
        env=dict(raw.get("env", {})),
        inter_item_delay=raw.get("inter_item_delay", 0.0),
    )
    cfg.validate()
    return cfg
