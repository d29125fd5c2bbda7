"""Command-line entry point.

Exit codes: 0 success, 1 domain error, 2 usage error. The AIQ_STORE and
AIQ_PORT environment variables override --store and --port when set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import timezone
from pathlib import Path
from typing import Sequence

from . import __version__
from .adapters import adapter_config_from_dict, probe_subject
from .administration import (
    Session,
    SessionStatus,
    SessionStore,
    Subject,
    SubjectCategory,
    record_manual_score,
    run_session,
    start_session,
    subject_from_dict,
)
from .battery import load_battery, parse_battery, validate_battery
from .errors import DomainError
from .grading import classify_grade, load_profile
from .reporting import (
    export_csv,
    rank_report,
    render_rank_text,
    trend_report,
)
from .scoring import iq_result_from_dict, session_iq

STORE_ENV_VAR = "AIQ_STORE"
PORT_ENV_VAR = "AIQ_PORT"
DEFAULT_STORE = "aiq-store"


def _resolve_store(args: argparse.Namespace) -> SessionStore:
    root = os.environ.get(STORE_ENV_VAR) or args.store
    return SessionStore(root)


def _resolve_port(args: argparse.Namespace) -> int:
    raw = os.environ.get(PORT_ENV_VAR)
    if raw:
        return int(raw)
    return args.port


def _load_adapter_config(value: str):
    if value.lstrip().startswith("{"):
        raw = json.loads(value)
    else:
        raw = json.loads(Path(value).read_text(encoding="utf-8"))
    return adapter_config_from_dict(raw)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_battery_validate(args: argparse.Namespace) -> int:
    path = Path(args.file)
    if not path.exists():
        print(f"error[file_not_found]: {path}", file=sys.stderr)
        return 1
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        print("error[parse_error]: empty battery file", file=sys.stderr)
        return 1
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        print(f"error[parse_error]: invalid JSON at line {exc.lineno}: {exc.msg}", file=sys.stderr)
        return 1
    try:
        battery = parse_battery(raw)
    except DomainError as exc:
        print(f"error[{exc.code}]: {exc.message}", file=sys.stderr)
        return 1
    violations = validate_battery(battery)
    if violations:
        for v in violations:
            print(f"error[{v.code}] at {v.location}: {v.message}", file=sys.stderr)
        return 1
    print(f"{battery.id} version {battery.version}: valid "
          f"({len(battery.subtests)} subtests, {len(battery.item_ids())} items)")
    return 0


def _cmd_subject_add(args: argparse.Namespace) -> int:
    store = _resolve_store(args)
    subject = Subject(
        id=args.id,
        display_name=args.name,
        category=SubjectCategory(args.category),
        region=args.region,
        vintage=args.vintage,
    )
    store.add_subject(subject)
    print(f"registered subject {subject.id}")
    return 0


def _cmd_subject_list(args: argparse.Namespace) -> int:
    store = _resolve_store(args)
    for subject in store.list_subjects():
        region = f"  region={subject.region}" if subject.region else ""
        vintage = f"  vintage={subject.vintage}" if subject.vintage else ""
        print(f"{subject.id}  [{subject.category.value}]  {subject.display_name}{region}{vintage}")
    return 0


def _cmd_session_start(args: argparse.Namespace) -> int:
    store = _resolve_store(args)
    battery = load_battery(args.battery)
    adapter = _load_adapter_config(args.adapter)
    session = start_session(store, battery, args.subject, adapter)
    print(session.id)
    return 0


def _cmd_session_run(args: argparse.Namespace) -> int:
    store = _resolve_store(args)
    session = store.load_session(args.id)
    session = run_session(store, session)
    print(f"{session.id}: {session.status.value}")
    if session.status == SessionStatus.COMPLETE:
        result = session_iq(session, store.get_battery(session.battery_ref))
        print(f"Q = {result.q_display}")
    return 0


def _cmd_session_show(args: argparse.Namespace) -> int:
    store = _resolve_store(args)
    session = store.load_session(args.id)
    battery = store.get_battery(session.battery_ref)
    print(f"session   {session.id}")
    print(f"subject   {session.subject_ref}")
    print(f"battery   {session.battery_ref.id} {session.battery_ref.version}")
    print(f"status    {session.status.value}")
    print(f"answered  {len(session.responses)}/{len(battery.item_ids())}")
    print(f"scored    {len(session.item_scores)}/{len(battery.item_ids())}")
    pending = session.pending_item_ids(battery)
    if pending:
        print(f"pending   {', '.join(pending)}")
    if session.status == SessionStatus.COMPLETE:
        result = session_iq(session, battery)
        scores = result.ability_scores
        print(f"abilities input={scores.input:.2f} output={scores.output:.2f} "
              f"mastery={scores.mastery:.2f} creation={scores.creation:.2f}")
        print(f"Q         {result.q_display}")
    return 0


def _cmd_score_interactive(args: argparse.Namespace) -> int:
    store = _resolve_store(args)
    session = store.load_session(args.id)
    battery = store.get_battery(session.battery_ref)
    pending = session.pending_item_ids(battery)
    if not pending:
        print("nothing pending")
        return 0
    grader = args.grader
    for item_id in pending:
        item = battery.find_item(item_id)
        response = session.responses[item_id]
        print(f"\nitem {item_id}  (max {item.max_points:g} points)")
        print(f"prompt:   {item.prompt.content}")
        print(f"response: {response.raw_response}")
        print(f"rubric:   {item.scoring.rubric}")
        while True:
            try:
                raw = input(f"points [0-{item.max_points:g}] or 'skip': ").strip()
            except EOFError:
                print("\nstopped")
                return 0
            if raw == "skip":
                break
            try:
                points = float(raw)
            except ValueError:
                print("enter a number or 'skip'")
                continue
            try:
                session = record_manual_score(store, session.id, item_id, points, grader)
            except DomainError as exc:
                print(f"error[{exc.code}]: {exc.message}")
                continue
            break
    print(f"\n{session.id}: {session.status.value}")
    if session.status == SessionStatus.COMPLETE:
        result = session_iq(session, battery)
        print(f"Q = {result.q_display}")
    return 0


def _cmd_grade_classify(args: argparse.Namespace) -> int:
    profile = load_profile(args.profile)
    result = classify_grade(profile, eps=args.eps)
    print(f"grade: {result.grade}")
    if result.matched_conditions:
        print("matched: " + ", ".join(result.matched_conditions))
    if result.next_grade_gaps:
        print(f"gaps to grade {min(result.grade + 1, 6) if not result.degenerate else 2}: "
              + ", ".join(result.next_grade_gaps))
    else:
        print("gaps: none (top grade)")
    return 0


def _cmd_probe(args: argparse.Namespace) -> int:
    cfg = _load_adapter_config(args.adapter)
    report = probe_subject(cfg)
    state = "reachable" if report.reachable else "unreachable"
    print(f"{state}  round_trip={report.round_trip:.3f}s  {report.detail}")
    return 0 if report.reachable else 1


def _collect_store_results(store: SessionStore) -> list:
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
    return [
        session_iq(session, store.get_battery(session.battery_ref))
        for session in latest.values()
    ]


def _cmd_report_rank(args: argparse.Namespace) -> int:
    store = _resolve_store(args)
    if args.results:
        raw = json.loads(Path(args.results).read_text(encoding="utf-8"))
        subjects = {s["id"]: subject_from_dict(s) for s in raw["subjects"]}
        results = [iq_result_from_dict(r) for r in raw["results"]]
    else:
        subjects = store.subject_registry()
        results = _collect_store_results(store)
    table = rank_report(results, subjects)
    print(render_rank_text(table))
    if args.csv:
        export_csv(table, args.csv)
        print(f"csv written to {args.csv}")
    return 0


def _year_fraction(dt) -> float:
    dt = dt.astimezone(timezone.utc)
    start = dt.replace(month=1, day=1, hour=0, minute=0, second=0, microsecond=0)
    end = start.replace(year=start.year + 1)
    return dt.year + (dt - start).total_seconds() / (end - start).total_seconds()


def _cmd_report_trend(args: argparse.Namespace) -> int:
    store = _resolve_store(args)
    if args.series:
        raw = json.loads(Path(args.series).read_text(encoding="utf-8"))
        series = {k: [(float(t), float(q)) for t, q in v] for k, v in raw.items()}
    else:
        series: dict[str, list[tuple[float, float]]] = {}
        for entry in store.list_sessions():
            if entry["status"] != SessionStatus.COMPLETE.value:
                continue
            session = store.load_session(entry["id"])
            result = session_iq(session, store.get_battery(session.battery_ref))
            when = session.finished_at or session.started_at
            series.setdefault(session.subject_ref, []).append((_year_fraction(when), result.q))
        series = {k: sorted(v) for k, v in series.items()}
    assessments = trend_report(series, args.baseline, horizon_factor=args.horizon)
    for a in assessments:
        crossing = f"  crossing at {a.crossing_time:.3f}" if a.crossing_time is not None else ""
        print(f"{a.subject_id}: scenario {a.scenario.value}  slope {a.slope:+.3f}/yr{crossing}")
    if args.csv:
        export_csv(assessments, args.csv)
        print(f"csv written to {args.csv}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .api import make_server

    store = _resolve_store(args)
    port = _resolve_port(args)
    assets = args.assets
    if assets is None:
        default_assets = Path("frontend") / "dist"
        if default_assets.is_dir():
            assets = default_assets
    if args.bind != "127.0.0.1":
        print("warning: binding beyond loopback; this service has no authentication",
              file=sys.stderr)
    server = make_server(store, port=port, bind=args.bind, assets_dir=assets)
    host, actual_port = server.server_address[:2]
    print(f"serving on http://{host}:{actual_port}  (store: {store.root})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_store_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--store", default=DEFAULT_STORE,
                        help=f"store directory (default {DEFAULT_STORE}; env {STORE_ENV_VAR} overrides)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aiq",
        description="Administer ability-based test batteries, compute weighted IQs, "
                    "classify intelligence grades, and produce reports.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    battery = commands.add_parser("battery", help="battery file tools")
    battery_sub = battery.add_subparsers(dest="subcommand", required=True)
    validate = battery_sub.add_parser("validate", help="strict-parse and validate a battery file")
    validate.add_argument("file")
    validate.set_defaults(func=_cmd_battery_validate)

    subject = commands.add_parser("subject", help="subject registry")
    subject_sub = subject.add_subparsers(dest="subcommand", required=True)
    add = subject_sub.add_parser("add", help="register a subject")
    _add_store_arg(add)
    add.add_argument("--id", required=True)
    add.add_argument("--name", required=True)
    add.add_argument("--category", choices=[c.value for c in SubjectCategory], required=True)
    add.add_argument("--region")
    add.add_argument("--vintage", type=int)
    add.set_defaults(func=_cmd_subject_add)
    lst = subject_sub.add_parser("list", help="list registered subjects")
    _add_store_arg(lst)
    lst.set_defaults(func=_cmd_subject_list)

    session = commands.add_parser("session", help="session lifecycle")
    session_sub = session.add_subparsers(dest="subcommand", required=True)
    start = session_sub.add_parser("start", help="create a session")
    _add_store_arg(start)
    start.add_argument("--battery", required=True, help="battery file")
    start.add_argument("--subject", required=True, help="registered subject id")
    start.add_argument("--adapter", required=True, help="adapter config JSON (file or inline)")
    start.set_defaults(func=_cmd_session_start)
    run = session_sub.add_parser("run", help="administer remaining items")
    _add_store_arg(run)
    run.add_argument("id")
    run.set_defaults(func=_cmd_session_run)
    show = session_sub.add_parser("show", help="session summary")
    _add_store_arg(show)
    show.add_argument("id")
    show.set_defaults(func=_cmd_session_show)

    score = commands.add_parser("score", help="human grading")
    score_sub = score.add_subparsers(dest="subcommand", required=True)
    interactive = score_sub.add_parser("interactive", help="terminal grading loop")
    _add_store_arg(interactive)
    interactive.add_argument("id")
    interactive.add_argument("--grader", default="console")
    interactive.set_defaults(func=_cmd_score_interactive)

    grade = commands.add_parser("grade", help="intelligence grade classifier")
    grade_sub = grade.add_subparsers(dest="subcommand", required=True)
    classify = grade_sub.add_parser("classify", help="classify a capability profile file")
    classify.add_argument("profile")
    classify.add_argument("--eps", type=float, default=0.0)
    classify.set_defaults(func=_cmd_grade_classify)

    probe = commands.add_parser("probe", help="adapter liveness check")
    probe.add_argument("--adapter", required=True)
    probe.set_defaults(func=_cmd_probe)

    report = commands.add_parser("report", help="rankings and trends")
    report_sub = report.add_subparsers(dest="subcommand", required=True)
    rank = report_sub.add_parser("rank", help="ranking table over stored or fixture results")
    _add_store_arg(rank)
    rank.add_argument("--results", help="JSON file with {subjects, results}")
    rank.add_argument("--csv", help="also write CSV here")
    rank.set_defaults(func=_cmd_report_rank)
    trend = report_sub.add_parser("trend", help="longitudinal trend assessment")
    _add_store_arg(trend)
    trend.add_argument("--baseline", required=True, help="human baseline subject id")
    trend.add_argument("--series", help="JSON file {subject: [[year, Q], ...]}")
    trend.add_argument("--horizon", type=float, default=1.0,
                       help="projected window-lengths ahead for crossing detection")
    trend.add_argument("--csv", help="also write CSV here")
    trend.set_defaults(func=_cmd_report_trend)

    serve = commands.add_parser("serve", help="run the local HTTP API")
    _add_store_arg(serve)
    serve.add_argument("--port", type=int, default=8177,
                       help=f"port (env {PORT_ENV_VAR} overrides)")
    serve.add_argument("--bind", default="127.0.0.1",
                       help="bind address (default loopback; no authentication)")
    serve.add_argument("--assets", help="static assets directory (grader console build)")
    serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error[file_not_found]: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error[parse_error]: invalid JSON at line {exc.lineno}: {exc.msg}", file=sys.stderr)
        return 1
    except DomainError as exc:
        print(f"error[{exc.code}]: {exc.message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
