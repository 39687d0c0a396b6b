"""Verification loop: prompt building, decision parsing, analyze()."""

import pytest

from cyberrag.classifiers import ClassScore, ClassificationTable, default_bindings
from cyberrag.errors import InvalidClass
from cyberrag.gateway import ChatRequest, ChatResponse
from cyberrag.knowledge import Chunk, EmbeddingVector, ScoredChunk
from cyberrag.orchestrator import (
    Decision,
    Orchestrator,
    OrchestratorConfig,
    build_rag_prompt,
    parse_decision,
)
from cyberrag.payload import AttackClass, PayloadRecord, extract_features

from conftest import PD001


def pd001_table():
    return ClassificationTable(
        payload_id="pd001",
        scores=[
            ClassScore(AttackClass.SSTI, 0.3956, "", "s"),
            ClassScore(AttackClass.SQLI, 0.9999, "", "q"),
            ClassScore(AttackClass.XSS, 0.0673, "", "x"),
        ],
    )


def evidence(n):
    return [
        ScoredChunk(
            Chunk(chunk_id=f"e{i}", attack_class=AttackClass.SQLI,
                  doc_path="d", start_offset=0, text=f"chunk {i}"),
            relevance=0.9,
            mmr_score=0.9,
        )
        for i in range(n)
    ]


def test_prompt_contains_probabilities_and_chunk_ids():
    record = PayloadRecord.create("pd001", PD001)
    request = build_rag_prompt(
        record, pd001_table(), extract_features(record.normalized),
        evidence(2), AttackClass.SQLI,
    )
    message = request.last_user_message()
    assert "SQL Injection: 0.9999" in message
    assert "e0" in message and "e1" in message


def test_prompt_empty_evidence_marker():
    record = PayloadRecord.create("pd001", PD001)
    request = build_rag_prompt(
        record, pd001_table(), extract_features(record.normalized), [], AttackClass.SQLI
    )
    assert "NO EVIDENCE RETRIEVED" in request.last_user_message()


def test_prompt_rejects_none_probe():
    record = PayloadRecord.create("x", "hello")
    with pytest.raises(InvalidClass):
        build_rag_prompt(
            record, pd001_table(), extract_features("hello"), [], AttackClass.NONE
        )


def test_parse_decision_confirm():
    assert parse_decision("CONFIRM sqli\nTime-delay tautology pattern.") == (
        Decision.CONFIRM, AttackClass.SQLI, "Time-delay tautology pattern.",
    )


def test_parse_decision_reject():
    assert parse_decision("REJECT xss\nNo script context.") == (
        Decision.REJECT, AttackClass.XSS, "No script context.",
    )


def test_parse_decision_fallback_abstain():
    decision, cls, text = parse_decision("I think maybe…")
    assert decision is Decision.ABSTAIN
    assert cls is None
    assert text == "I think maybe…"


def test_analyze_pd001_confirms_sqli(orchestrator, remote_bindings):
    remote = Orchestrator(
        remote_bindings, orchestrator.stores, orchestrator.embedder, orchestrator.llm
    )
    verdict = remote.analyze(PayloadRecord.create("pd001", PD001))
    assert verdict.final_class is AttackClass.SQLI
    assert verdict.iterations == 1
    assert verdict.confidence == pytest.approx(0.9999)
    assert [s.llm_decision for s in verdict.trace] == [Decision.CONFIRM]


def test_analyze_benign_short_circuits(orchestrator):
    verdict = orchestrator.analyze(PayloadRecord.create("b", "hello world"))
    assert verdict.final_class is AttackClass.NONE
    assert verdict.iterations == 1
    assert verdict.trace == []  # no LLM step below the gate


def test_analyze_two_step_reject_then_confirm(orchestrator):
    # eight SQL keywords (no shape) outrank the XSS markup, so sqli is probed
    # first and rejected; the masked recompute then confirms xss
    payload = "select union drop insert update delete from where <img src=x onerror=alert(1)>"
    verdict = orchestrator.analyze(PayloadRecord.create("two", payload))
    assert verdict.final_class is AttackClass.XSS
    assert verdict.iterations == 2
    assert [s.llm_decision for s in verdict.trace] == [Decision.REJECT, Decision.CONFIRM]
    assert [s.probed_class for s in verdict.trace] == [AttackClass.SQLI, AttackClass.XSS]


def test_analyze_all_rejected_returns_none(orchestrator):
    # sql keywords but no shape: stub rejects sqli; nothing else crosses gate
    payload = "please select the order from the list and update it by tomorrow"
    verdict = orchestrator.analyze(PayloadRecord.create("fp", payload))
    assert verdict.final_class is AttackClass.NONE
    assert verdict.justification == "rejected by verification"
    assert verdict.trace[0].llm_decision is Decision.REJECT


def test_analyze_without_retrieval_has_empty_evidence(orchestrator):
    verdict = orchestrator.analyze(
        PayloadRecord.create("a", "' or 1=1 --"), use_retrieval=False
    )
    assert verdict.final_class is AttackClass.SQLI
    assert verdict.evidence == []


def test_analyze_respects_max_iterations(orchestrator):
    config = OrchestratorConfig(max_iterations=1)
    payload = "select union drop insert update delete from where <img src=x onerror=alert(1)>"
    verdict = orchestrator.analyze(PayloadRecord.create("cap", payload), config)
    assert verdict.iterations == 1
    assert verdict.final_class is AttackClass.NONE  # loop budget exhausted after reject


def test_verdict_roundtrip(orchestrator):
    from cyberrag.orchestrator import Verdict

    verdict = orchestrator.analyze(PayloadRecord.create("rt", "{{7*7}}"))
    assert Verdict.from_dict(verdict.to_dict()).to_dict() == verdict.to_dict()
