"""Interactive chat sessions over stored reports."""

import pytest

from cyberrag.chat import ChatService, Expertise
from cyberrag.errors import InvalidParams, UnknownAlert
from cyberrag.payload import AttackClass, PayloadRecord
from cyberrag.reporting import build_attack_representation, render_report
from cyberrag.storage import ReportStore, StoredReport


@pytest.fixture()
def service(tmp_path, orchestrator, stores, embedder, stub):
    reports = ReportStore(tmp_path / "reports.jsonl")
    record = PayloadRecord.create("ssti-1", "{{7*7}}")
    verdict = orchestrator.analyze(record)
    assert verdict.final_class is AttackClass.SSTI
    rep = build_attack_representation(verdict, record)
    doc, _ = render_report(rep, "alert-ssti", mode="json")
    reports.append(StoredReport("alert-ssti", doc, verdict, record))
    return ChatService(reports, stores, embedder, stub)


def test_open_session_on_unknown_alert(service):
    with pytest.raises(UnknownAlert):
        service.open_session("nope")


def test_two_sessions_are_distinct(service):
    s1 = service.open_session("alert-ssti")
    s2 = service.open_session("alert-ssti")
    assert s1.session_id != s2.session_id
    assert s1.history == []


def test_answer_is_grounded_in_report(service):
    session = service.open_session("alert-ssti")
    answer, prompt = service.ask(session, "Why was this classified as SSTI?", debug=True)
    assert "{{7*7}}" in answer
    assert "ssti" in answer
    # prompt carries report, excerpt, final class, trace, and the question last
    assert "Payload excerpt: {{7*7}}" in prompt
    assert prompt.rstrip().endswith("Why was this classified as SSTI?")
    assert len(session.history) == 2


def test_empty_message_rejected_history_unchanged(service):
    session = service.open_session("alert-ssti")
    with pytest.raises(InvalidParams):
        service.ask(session, "   ")
    assert session.history == []


def test_history_cap_thirty_two_entries(service):
    session = service.open_session("alert-ssti")
    for i in range(17):
        service.ask(session, f"question number {i}")
    assert len(session.history) == 32
    # earliest turn evicted
    assert session.history[0] == ("user", "question number 1")


def test_session_isolation(service):
    s1 = service.open_session("alert-ssti")
    s2 = service.open_session("alert-ssti")
    service.ask(s1, "first question")
    assert s2.history == []


def test_expertise_selects_system_prompt(service):
    novice = service.open_session("alert-ssti", Expertise.NOVICE)
    advanced = service.open_session("alert-ssti", Expertise.ADVANCED)
    assert novice.expertise is Expertise.NOVICE
    assert advanced.expertise is Expertise.ADVANCED
