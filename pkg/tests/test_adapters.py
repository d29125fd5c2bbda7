from __future__ import annotations

import stat
import sys

import pytest

from aiq.adapters import (
    AdapterConfig,
    AdapterKind,
    ResponseOutcome,
    administer_item,
    adapter_config_from_dict,
    adapter_config_to_dict,
    default_timeout,
    probe_subject,
)
from aiq.battery import ExactMatch
from aiq.errors import ConfigInvalid

from .conftest import http_adapter, make_item


def shell_stub(tmp_path, name: str, body: str) -> str:
    path = tmp_path / name
    path.write_text(f"#!/bin/sh\n{body}\n", encoding="utf-8")
    path.chmod(path.stat().st_mode | stat.S_IEXEC)
    return str(path)


ITEM = make_item("q1", "2+2", ExactMatch(("4",)))


# ---------------------------------------------------------------------------
# Config validation
# ---------------------------------------------------------------------------


def test_http_config_requires_endpoint():
    with pytest.raises(ConfigInvalid):
        AdapterConfig(kind=AdapterKind.HTTP_JSON).validate()


def test_kind_specific_fields_are_exclusive():
    with pytest.raises(ConfigInvalid):
        AdapterConfig(
            kind=AdapterKind.SUBPROCESS, command="cat", endpoint="http://x/"
        ).validate()
    with pytest.raises(ConfigInvalid):
        AdapterConfig(kind=AdapterKind.MANUAL_TRANSCRIPT, command="cat").validate()


def test_timeout_must_be_positive():
    with pytest.raises(ConfigInvalid):
        AdapterConfig(kind=AdapterKind.MANUAL_TRANSCRIPT, timeout=0).validate()


def test_timeout_env_override(monkeypatch):
    monkeypatch.setenv("AIQ_HTTP_TIMEOUT_MS", "1500")
    assert default_timeout() == 1.5
    cfg = adapter_config_from_dict({"kind": "manual_transcript"})
    assert cfg.timeout == 1.5
    monkeypatch.delenv("AIQ_HTTP_TIMEOUT_MS")
    assert default_timeout() == 30.0


def test_config_round_trip():
    cfg = AdapterConfig(
        kind=AdapterKind.SUBPROCESS,
        command="cat",
        args=("-u",),
        timeout=2.5,
        env={"LANG": "C"},
        inter_item_delay=0.1,
    )
    assert adapter_config_from_dict(adapter_config_to_dict(cfg)) == cfg


def test_config_from_dict_rejects_unknown_fields():
    with pytest.raises(ConfigInvalid):
        adapter_config_from_dict({"kind": "http_json", "endpoint": "http://x/", "retries": 7})


# ---------------------------------------------------------------------------
# HTTP adapter
# ---------------------------------------------------------------------------


def test_http_echo_answers_with_prompt_verbatim(stub_subject):
    server = stub_subject()
    record = administer_item(http_adapter(server), ITEM)
    assert record.outcome == ResponseOutcome.ANSWERED
    assert record.raw_response == "2+2"
    assert record.latency <= 5.0


def test_http_replay_is_deterministic_modulo_latency(stub_subject):
    server = stub_subject(answers={"2+2": "4"})
    first = administer_item(http_adapter(server), ITEM)
    second = administer_item(http_adapter(server), ITEM)
    assert first.raw_response == second.raw_response == "4"
    assert first.outcome == second.outcome


def test_http_timeout_is_an_outcome_not_an_exception(stub_subject):
    server = stub_subject(delay=1.0)
    record = administer_item(http_adapter(server, timeout=0.2), ITEM)
    assert record.outcome == ResponseOutcome.TIMEOUT
    assert record.raw_response == ""


def test_http_refusal_maps_to_refused(stub_subject):
    server = stub_subject(refusals={"2+2"})
    record = administer_item(http_adapter(server), ITEM)
    assert record.outcome == ResponseOutcome.REFUSED
    assert "403" in record.detail


def test_http_closed_port_is_transport_error():
    cfg = AdapterConfig(
        kind=AdapterKind.HTTP_JSON, endpoint="http://127.0.0.1:9/", timeout=0.5
    )
    record = administer_item(cfg, ITEM)
    assert record.outcome == ResponseOutcome.TRANSPORT_ERROR
    assert record.raw_response == ""
    assert record.detail


# ---------------------------------------------------------------------------
# Subprocess adapter
# ---------------------------------------------------------------------------


def test_subprocess_echo_line_protocol(tmp_path):
    command = shell_stub(tmp_path, "echoer.sh", 'read line; echo "$line"')
    cfg = AdapterConfig(kind=AdapterKind.SUBPROCESS, command=command, timeout=5)
    record = administer_item(cfg, ITEM)
    assert record.outcome == ResponseOutcome.ANSWERED
    assert record.raw_response == "2+2"


def test_subprocess_that_never_replies_times_out(tmp_path):
    command = shell_stub(tmp_path, "sleeper.sh", "sleep 30")
    cfg = AdapterConfig(kind=AdapterKind.SUBPROCESS, command=command, timeout=1)
    record = administer_item(cfg, ITEM)
    assert record.outcome == ResponseOutcome.TIMEOUT
    assert 0.9 <= record.latency <= 2.0


def test_subprocess_nonexistent_command_is_transport_error():
    cfg = AdapterConfig(kind=AdapterKind.SUBPROCESS, command="/no/such/binary", timeout=1)
    record = administer_item(cfg, ITEM)
    assert record.outcome == ResponseOutcome.TRANSPORT_ERROR


def test_subprocess_silent_exit_is_transport_error(tmp_path):
    command = shell_stub(tmp_path, "mute.sh", "exit 0")
    cfg = AdapterConfig(kind=AdapterKind.SUBPROCESS, command=command, timeout=2)
    record = administer_item(cfg, ITEM)
    assert record.outcome == ResponseOutcome.TRANSPORT_ERROR
    assert "no response line" in record.detail


def test_subprocess_env_passthrough(tmp_path):
    command = shell_stub(tmp_path, "envy.sh", 'read line; echo "$AIQ_STUB_ANSWER"')
    cfg = AdapterConfig(
        kind=AdapterKind.SUBPROCESS, command=command, timeout=5,
        env={"AIQ_STUB_ANSWER": "four"},
    )
    record = administer_item(cfg, ITEM)
    assert record.raw_response == "four"


# ---------------------------------------------------------------------------
# Manual transcript adapter
# ---------------------------------------------------------------------------


def test_manual_transcript_passes_operator_text_through():
    cfg = AdapterConfig(kind=AdapterKind.MANUAL_TRANSCRIPT)
    shown: list[str] = []
    record = administer_item(
        cfg, ITEM, input_fn=lambda: "the subject said four", output_fn=shown.append
    )
    assert record.outcome == ResponseOutcome.ANSWERED
    assert record.raw_response == "the subject said four"
    assert any("2+2" in line for line in shown)


def test_manual_transcript_eof_marks_refusal():
    cfg = AdapterConfig(kind=AdapterKind.MANUAL_TRANSCRIPT)

    def no_input() -> str:
        raise EOFError

    record = administer_item(cfg, ITEM, input_fn=no_input, output_fn=lambda _: None)
    assert record.outcome == ResponseOutcome.REFUSED


# ---------------------------------------------------------------------------
# probe_subject
# ---------------------------------------------------------------------------


def test_probe_running_http_stub_is_reachable(stub_subject):
    server = stub_subject()
    report = probe_subject(http_adapter(server))
    assert report.reachable is True
    assert report.round_trip >= 0


def test_probe_closed_port_unreachable_with_detail():
    cfg = AdapterConfig(
        kind=AdapterKind.HTTP_JSON, endpoint="http://127.0.0.1:9/", timeout=0.5
    )
    report = probe_subject(cfg)
    assert report.reachable is False
    assert "TransportError" in report.detail


def test_probe_nonexistent_subprocess_unreachable():
    cfg = AdapterConfig(kind=AdapterKind.SUBPROCESS, command="/no/such/binary", timeout=1)
    report = probe_subject(cfg)
    assert report.reachable is False


def test_probe_existing_subprocess_reachable():
    cfg = AdapterConfig(kind=AdapterKind.SUBPROCESS, command=sys.executable,
                        args=("-c", "pass"), timeout=5)
    report = probe_subject(cfg)
    assert report.reachable is True
