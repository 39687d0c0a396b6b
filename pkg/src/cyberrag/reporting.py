"""Attack representation and the four-section incident report.

Facts live in the representation and are produced deterministically from the
verdict; the optional LLM pass only polishes prose and can never change what
the report claims. Evidence citations are restricted to chunks the verdict
actually retrieved, which is the structural guard behind the factual
consistency score.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources as importlib_resources

from .gateway import ChatProvider, ChatRequest
from .orchestrator import Verdict
from .payload import (
    AttackClass,
    CLASS_DISPLAY,
    PayloadRecord,
    bucket_count,
    bucket_match,
    matched_sql_shapes,
)

FORMAT_VERSION = "1"

SECTION_TITLES = ("Analytical Summary", "Conclusion", "Feature Vector Summary", "Reasoning")

_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")

_CLASS_NAME_CUES = {
    AttackClass.SQLI: ("sql injection", "sqli"),
    AttackClass.XSS: ("cross-site scripting", "xss"),
    AttackClass.SSTI: ("template injection", "ssti"),
    AttackClass.NONE: (),
}

# Indicator phrases keyed on deterministic payload signals: feature counts
# plus which SQL shape regexes fired on the normalized text.
_SHAPE_PHRASES = {
    0: "String encapsulation: quote characters are used to break out of SQL string boundaries.",
    1: "Tautology condition: an always-true comparison designed to subvert query logic.",
    2: "Stacked query: a statement separator followed by a SQL verb appends an attacker-controlled statement.",
    3: "Time-delay primitive: waitfor/sleep patterns commonly used in blind SQL injection.",
}


def _load_mitigations() -> dict:
    with importlib_resources.files("cyberrag.resources").joinpath(
        "mitigations.json"
    ).open("r", encoding="utf-8") as fh:
        return json.load(fh)


_MITIGATIONS = _load_mitigations()


@dataclass
class AttackRepresentation:
    verdict: Verdict
    payload_excerpt: str
    salient_features: list[tuple[str, float, str]]
    contextual_indicators: list[str]
    external_knowledge: list[tuple[str, str, str]]
    mitigation_notes: list[str]
    # stamped once here so repeated renders of one representation are
    # byte-identical
    created_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat()
    )


@dataclass
class ReportDocument:
    report_id: str
    alert_id: str
    created_at: str
    sections: dict
    format_version: str = FORMAT_VERSION

    def to_dict(self) -> dict:
        return {
            "report_id": self.report_id,
            "alert_id": self.alert_id,
            "created_at": self.created_at,
            "sections": self.sections,
            "format_version": self.format_version,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReportDocument":
        return cls(
            report_id=data["report_id"],
            alert_id=data["alert_id"],
            created_at=data["created_at"],
            sections=data["sections"],
            format_version=data["format_version"],
        )


def _escape_excerpt(text: str, limit: int = 256) -> str:
    excerpt = text[:limit]
    return excerpt.replace("\\", "\\\\").replace("\n", "\\n").replace("\r", "\\r")


def _split_sentences(text: str) -> list[str]:
    return [s.strip() for s in _SENTENCE_RE.split(text) if s.strip()]


def _extractive_summary(chunk_text: str, attack_class: AttackClass) -> str:
    sentences = _split_sentences(chunk_text)
    if not sentences:
        return chunk_text.strip()
    for sentence in sentences:
        lowered = sentence.lower()
        if any(cue in lowered for cue in _CLASS_NAME_CUES.get(attack_class, ())):
            return sentence
    return sentences[0]


def _indicator_phrases(verdict: Verdict, normalized: str) -> list[str]:
    fv = verdict.feature_vector
    phrases: list[str] = []
    shapes = matched_sql_shapes(normalized) if fv.sql_syntax_match else []
    if fv.quote_imbalance > 0 and 0 not in shapes:
        phrases.append(
            "String encapsulation: an unbalanced quote character indicates an attempt to break SQL string boundaries."
        )
    for idx in shapes:
        phrases.append(_SHAPE_PHRASES[idx])
    if fv.sql_keywords_count >= 3:
        phrases.append(
            "Command-like patterns: dense SQL keyword usage resembles query fragments rather than natural input."
        )
    if fv.paren_imbalance > 0:
        phrases.append(
            "Syntax anomalies: unbalanced parentheses are indicative of filter bypass or parser manipulation."
        )
    if fv.html_tag_count > 0:
        phrases.append("Markup injection: HTML tag structures are embedded in the input.")
    if fv.script_event_handler_count > 0:
        phrases.append(
            "Script event handler: on* attributes execute JavaScript on user interaction."
        )
    if fv.template_marker_count > 0:
        phrases.append(
            "Template expression markers: delimiters that server-side template engines evaluate as code."
        )
    return phrases


def build_attack_representation(
    verdict: Verdict, payload: PayloadRecord
) -> AttackRepresentation:
    """Distill a verdict into the structured semantic summary of the incident."""
    fv = verdict.feature_vector.to_dict()
    salient = [
        (name, value, bucket_match(value) if name == "sql_syntax_match" else bucket_count(int(value)))
        for name, value in fv.items()
        if value
    ]
    if verdict.final_class is AttackClass.NONE:
        indicators: list[str] = []
    else:
        indicators = _indicator_phrases(verdict, payload.normalized)
    external = [
        (sc.chunk.chunk_id, sc.chunk.doc_path, _extractive_summary(sc.chunk.text, verdict.final_class))
        for sc in verdict.evidence
    ]
    return AttackRepresentation(
        verdict=verdict,
        payload_excerpt=_escape_excerpt(payload.raw),
        salient_features=salient,
        contextual_indicators=indicators,
        external_knowledge=external,
        mitigation_notes=list(_MITIGATIONS[verdict.final_class.label]),
    )


def _conclusion_text(rep: AttackRepresentation) -> str:
    verdict = rep.verdict
    if verdict.final_class is AttackClass.NONE:
        if verdict.candidate_class is AttackClass.NONE:
            return (
                "No classifier crossed the confidence gate and no attack indicators were found. "
                "The payload is treated as benign traffic."
            )
        return (
            f"The initial {CLASS_DISPLAY[verdict.candidate_class]} hypothesis was rejected during "
            "knowledge-base verification. The alert is treated as a false positive and the payload "
            "as benign traffic."
        )
    name = CLASS_DISPLAY[verdict.final_class]
    return (
        f"The payload presents a high-confidence match with known {name} signatures "
        f"(classifier probability {verdict.confidence:.4f}, verified in {verdict.iterations} "
        "iteration(s) against the class knowledge base). The classification is supported by "
        "the syntactic indicators above and corroborating retrieved evidence."
    )


def _feature_summary(rep: AttackRepresentation) -> list[list]:
    out = []
    for name, value in rep.verdict.feature_vector.to_dict().items():
        bucket = bucket_match(value) if name == "sql_syntax_match" else bucket_count(int(value))
        out.append([name, value, bucket])
    return out


def build_report_document(rep: AttackRepresentation, alert_id: str) -> ReportDocument:
    verdict = rep.verdict
    findings = list(rep.contextual_indicators)
    if verdict.final_class is not AttackClass.NONE and not findings:
        findings = [
            f"Classifier consensus: the {CLASS_DISPLAY[verdict.final_class]} model scored "
            f"{verdict.confidence:.4f} and verification confirmed the label."
        ]
    # Exactly the four paper-order section keys, nothing else; everything
    # beyond them (excerpt, evidence, mitigations) travels with the verdict
    # and representation.
    sections = {
        "analytical_summary": findings,
        "conclusion": _conclusion_text(rep),
        "feature_vector_summary": _feature_summary(rep),
        "reasoning": verdict.justification,
    }
    return ReportDocument(
        report_id=f"rpt-{alert_id}",
        alert_id=alert_id,
        created_at=rep.created_at,
        sections=sections,
    )


def _render_markdown(doc: ReportDocument, rep: AttackRepresentation) -> str:
    s = doc.sections
    lines = [f"# Incident Report {doc.report_id}", ""]
    lines.append(f"Payload excerpt: `{rep.payload_excerpt}`")
    lines += ["", "## Analytical Summary", ""]
    if s["analytical_summary"]:
        for i, finding in enumerate(s["analytical_summary"], start=1):
            lines.append(f"{i}. {finding}")
    else:
        lines.append("No attack indicators were identified.")
    lines += ["", "## Conclusion", "", s["conclusion"], ""]
    lines.append("## Feature Vector Summary")
    lines.append("")
    for name, value, bucket in s["feature_vector_summary"]:
        lines.append(f"- {name}: {bucket} ({value})")
    lines += ["", "## Reasoning", ""]
    lines.append(s["reasoning"] or "(none)")
    if rep.external_knowledge:
        lines += ["", "### Retrieved evidence", ""]
        lines += [
            f"- [{chunk_id}] ({doc_path}) {summary}"
            for chunk_id, doc_path, summary in rep.external_knowledge
        ]
    if rep.mitigation_notes:
        lines += ["", "### Suggested mitigations", ""]
        lines += [f"- {note}" for note in rep.mitigation_notes]
    lines.append("")
    return "\n".join(lines)


def render_report(
    rep: AttackRepresentation,
    alert_id: str,
    mode: str = "json",
    llm: ChatProvider | None = None,
) -> tuple[ReportDocument, str]:
    """Render the representation as JSON or Markdown.

    JSON is fully deterministic. Markdown may optionally be passed through the
    chat endpoint for a facts-preserving rewrite; any failure falls back to
    the deterministic draft and is noted in the reasoning section.
    """
    doc = build_report_document(rep, alert_id)
    if mode == "json":
        return doc, json.dumps(doc.to_dict(), indent=2, sort_keys=True)
    if mode != "markdown":
        raise ValueError(f"unknown render mode {mode!r}")

    draft = _render_markdown(doc, rep)
    if llm is None:
        return doc, draft
    try:
        response = llm.chat(
            ChatRequest(
                model="",
                messages=[
                    (
                        "system",
                        "Rewrite the following incident report for clarity. Keep every "
                        "section header, number, identifier and fact exactly as given; "
                        "change no facts.",
                    ),
                    ("user", draft),
                ],
            )
        )
        text = response.content
        if all(f"## {title}" in text for title in SECTION_TITLES):
            return doc, text
    except Exception:
        pass
    doc.sections["reasoning"] = (doc.sections["reasoning"] + " [deterministic rendering]").strip()
    return doc, _render_markdown(doc, rep)
