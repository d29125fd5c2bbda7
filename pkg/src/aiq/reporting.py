"""Ranking tables, longitudinal trend assessments, and CSV export.

Rank tables sort by Q descending with ties broken by subject id
(ascending), so output order never depends on input order. Trend
assessments fit least-squares lines per subject and label each series
against a designated human baseline:

    A - the fitted line crosses above the baseline within the observation
        window or one projected window ahead (crossing time reported)
    B - the baseline series itself
    C - rising and closing the gap, but no crossing inside that horizon
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from statistics import linear_regression
from typing import Any, Callable, Iterable, Mapping, Sequence

from .administration import Subject
from .errors import (
    DuplicateSubject,
    InsufficientData,
    StoreWriteError,
    UnknownBaseline,
    UnknownSubject,
)
from .scoring import IQResult, format_q
from .timeutil import isoformat_utc, utc_now


@dataclass(frozen=True)
class RankRow:
    rank: int
    subject_id: str
    display_name: str
    region: str | None
    q: float

    @property
    def q_display(self) -> str:
        return format_q(self.q)


@dataclass(frozen=True)
class RankTable:
    as_of: datetime
    rows: tuple[RankRow, ...]


def rank_report(
    results: Iterable[IQResult],
    subjects: Mapping[str, Subject],
    *,
    clock: Callable[[], datetime] | None = None,
) -> RankTable:
    """Rank one result per subject by Q descending.

    The caller selects which session represents each subject; a subject
    appearing twice is an error, not a silent pick.
    """
    if clock is None:
        clock = utc_now
    seen: set[str] = set()
    entries = []
    for result in results:
        if result.subject_ref in seen:
            raise DuplicateSubject(f"subject {result.subject_ref!r} appears more than once")
        seen.add(result.subject_ref)
        if result.subject_ref not in subjects:
            raise UnknownSubject(f"subject {result.subject_ref!r} is not registered")
        entries.append(result)

    entries.sort(key=lambda r: (-r.q, r.subject_ref))
    rows = []
    for position, result in enumerate(entries, start=1):
        subject = subjects[result.subject_ref]
        rows.append(
            RankRow(
                rank=position,
                subject_id=subject.id,
                display_name=subject.display_name,
                region=subject.region,
                q=result.q,
            )
        )
    return RankTable(as_of=clock(), rows=tuple(rows))


class TrendScenario(str, Enum):
    A = "A"
    B = "B"
    C = "C"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class TrendAssessment:
    subject_id: str
    baseline_id: str
    slope: float
    scenario: TrendScenario
    crossing_time: float | None = None


def fit_line(points: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Least-squares (slope, intercept) for a (time, Q) series."""
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    slope, intercept = linear_regression(xs, ys)
    return slope, intercept


def trend_report(
    series: Mapping[str, Sequence[tuple[float, float]]],
    human_baseline: str,
    *,
    horizon_factor: float = 1.0,
) -> list[TrendAssessment]:
    """Label every non-baseline series A, C, or Indeterminate.

    Times are fractional years; slopes come out in IQ points per year.
    The crossing horizon for scenario A is the subject's own observation
    window extended by ``horizon_factor`` window-lengths.
    """
    if human_baseline not in series:
        raise UnknownBaseline(f"baseline subject {human_baseline!r} has no series")
    for subject_id, points in series.items():
        if len(points) < 2:
            raise InsufficientData(
                f"series for {subject_id!r} has {len(points)} point(s); need >= 2"
            )

    baseline_slope, baseline_intercept = fit_line(series[human_baseline])
    assessments = [
        TrendAssessment(
            subject_id=human_baseline,
            baseline_id=human_baseline,
            slope=baseline_slope,
            scenario=TrendScenario.B,
        )
    ]

    for subject_id in sorted(series):
        if subject_id == human_baseline:
            continue
        points = sorted(series[subject_id])
        slope, intercept = fit_line(points)
        window_start, window_end = points[0][0], points[-1][0]
        horizon = window_end + horizon_factor * (window_end - window_start)

        scenario = TrendScenario.INDETERMINATE
        crossing: float | None = None
        closing = slope > baseline_slope
        if closing:
            crossing_at = (baseline_intercept - intercept) / (slope - baseline_slope)
            if window_start <= crossing_at <= horizon:
                scenario = TrendScenario.A
                crossing = crossing_at
            elif slope > 0 and crossing_at > horizon:
                # Still below at the end of the window, gap shrinking.
                gap_at_end = (baseline_slope * window_end + baseline_intercept) - (
                    slope * window_end + intercept
                )
                if gap_at_end > 0:
                    scenario = TrendScenario.C
        assessments.append(
            TrendAssessment(
                subject_id=subject_id,
                baseline_id=human_baseline,
                slope=slope,
                scenario=scenario,
                crossing_time=crossing,
            )
        )
    return assessments


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def export_csv(
    data: RankTable | Sequence[TrendAssessment] | Sequence[IQResult],
    path: str | Path,
) -> Path:
    """Write RFC-4180 CSV with a header row; Q rendered with 2 decimals."""
    path = Path(path)
    try:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            _write_rows(writer, data)
    except OSError as exc:
        raise StoreWriteError(f"cannot write {path}: {exc}")
    return path


def _write_rows(writer: Any, data: Any) -> None:
    if isinstance(data, RankTable):
        writer.writerow(["rank", "subject_id", "display_name", "region", "absolute_iq"])
        for row in data.rows:
            writer.writerow(
                [row.rank, row.subject_id, row.display_name, row.region or "", row.q_display]
            )
        return

    items = list(data)
    if items and isinstance(items[0], TrendAssessment):
        writer.writerow(["subject_id", "baseline_id", "slope", "scenario", "crossing_time"])
        for a in items:
            writer.writerow(
                [
                    a.subject_id,
                    a.baseline_id,
                    repr(a.slope),
                    a.scenario.value,
                    "" if a.crossing_time is None else repr(a.crossing_time),
                ]
            )
        return

    # IQResult rows (rank-free export).
    writer.writerow(["subject_id", "Q", "f_I", "f_O", "f_S", "f_C", "computed_at"])
    for r in items:
        writer.writerow(
            [
                r.subject_ref,
                r.q_display,
                format_q(r.ability_scores.input),
                format_q(r.ability_scores.output),
                format_q(r.ability_scores.mastery),
                format_q(r.ability_scores.creation),
                isoformat_utc(r.computed_at),
            ]
        )


def render_rank_text(table: RankTable) -> str:
    """Aligned plain-text table: rank, region, subject, Absolute IQ."""
    headers = ("Rank", "Region", "Subject", "Absolute IQ")
    cells = [
        (str(row.rank), row.region or "", row.display_name, row.q_display)
        for row in table.rows
    ]
    widths = [
        max(len(headers[col]), *(len(c[col]) for c in cells)) if cells else len(headers[col])
        for col in range(4)
    ]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip(),
        "  ".join("-" * widths[i] for i in range(4)),
    ]
    for row_cells in cells:
        lines.append("  ".join(row_cells[i].ljust(widths[i]) for i in range(4)).rstrip())
    return "\n".join(lines)
