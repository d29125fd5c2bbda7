"""UTC clock and timestamp serialization helpers.

All timestamps in the framework are timezone-aware UTC. Operations that
record times take an injectable ``clock`` so tests stay deterministic.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

from .errors import ParseError


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def isoformat_utc(dt: datetime) -> str:
    if dt.tzinfo is None:
        raise ValueError("naive datetime; all framework timestamps are UTC-aware")
    return dt.astimezone(timezone.utc).isoformat()


def parse_utc(text: str) -> datetime:
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        raise ParseError(f"invalid timestamp {text!r}")
    if dt.tzinfo is None:
        raise ParseError(f"timestamp {text!r} lacks a timezone")
    return dt.astimezone(timezone.utc)


class TickingClock:
    """Deterministic clock for tests: starts at a fixed instant, advances a
    fixed step per call."""

    def __init__(self, start: datetime, step_seconds: float = 1.0):
        if start.tzinfo is None:
            raise ValueError("start must be timezone-aware")
        self._current = start.astimezone(timezone.utc)
        self._step = step_seconds

    def __call__(self) -> datetime:
        now = self._current
        self._current = now + timedelta(seconds=self._step)
        return now
