"""The agentic core: classify, retrieve, verify, and emit a Verdict.

The loop is deliberately simple and provably terminating: the gated argmax
proposes a candidate class, retrieval plus the LLM either confirms it or
vetoes it, and a veto permanently masks that class's score before the argmax
is recomputed. With finitely many classes the loop cannot spin.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources as importlib_resources

from .classifiers import ClassificationTable, ClassifierBinding, classify_all, f_max
from .errors import EndpointUnavailable, InvalidClass, StoreUninitialized, TemplateMissing
from .gateway import ChatProvider, ChatRequest
from .knowledge import Embedder, ScoredChunk, StoreRegistry, mmr_retrieve
from .payload import AttackClass, FeatureVector, PayloadRecord, extract_features


class Decision(Enum):
    CONFIRM = "confirm"
    REJECT = "reject"
    ABSTAIN = "abstain"


class AbstainPolicy(Enum):
    TREAT_AS_REJECT = "treat_as_reject"
    TREAT_AS_CONFIRM = "treat_as_confirm"


@dataclass
class OrchestratorConfig:
    max_iterations: int = 3
    retrieve_k: int = 4
    mmr_lambda: float = 0.5
    abstain_policy: AbstainPolicy = AbstainPolicy.TREAT_AS_REJECT

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class LoopStep:
    step_index: int
    probed_class: AttackClass
    retrieved_count: int
    llm_decision: Decision
    llm_raw: str

    def to_dict(self) -> dict:
        return {
            "step_index": self.step_index,
            "probed_class": self.probed_class.label,
            "retrieved_count": self.retrieved_count,
            "llm_decision": self.llm_decision.value,
            "llm_raw": self.llm_raw,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LoopStep":
        return cls(
            step_index=data["step_index"],
            probed_class=AttackClass.from_name(data["probed_class"]),
            retrieved_count=data["retrieved_count"],
            llm_decision=Decision(data["llm_decision"]),
            llm_raw=data["llm_raw"],
        )


@dataclass
class Verdict:
    payload_id: str
    final_class: AttackClass
    candidate_class: AttackClass
    confidence: float
    justification: str
    evidence: list[ScoredChunk]
    feature_vector: FeatureVector
    iterations: int
    trace: list[LoopStep] = field(default_factory=list)

    def trace_json(self) -> str:
        return json.dumps([s.to_dict() for s in self.trace], indent=2)

    def to_dict(self) -> dict:
        return {
            "payload_id": self.payload_id,
            "final_class": self.final_class.label,
            "candidate_class": self.candidate_class.label,
            "confidence": self.confidence,
            "justification": self.justification,
            "evidence": [sc.to_dict() for sc in self.evidence],
            "feature_vector": self.feature_vector.to_dict(),
            "iterations": self.iterations,
            "trace": [s.to_dict() for s in self.trace],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Verdict":
        from .knowledge import ScoredChunk

        return cls(
            payload_id=data["payload_id"],
            final_class=AttackClass.from_name(data["final_class"]),
            candidate_class=AttackClass.from_name(data["candidate_class"]),
            confidence=data["confidence"],
            justification=data["justification"],
            evidence=[ScoredChunk.from_dict(sc) for sc in data["evidence"]],
            feature_vector=FeatureVector.from_dict(data["feature_vector"]),
            iterations=data["iterations"],
            trace=[LoopStep.from_dict(s) for s in data["trace"]],
        )


def _load_template(name: str) -> str:
    res = importlib_resources.files("cyberrag.resources.templates").joinpath(name)
    try:
        with res.open("r", encoding="utf-8") as fh:
            return fh.read()
    except FileNotFoundError as exc:
        raise TemplateMissing(name) from exc


def _fmt_probability(p: float) -> str:
    return format(p, "g")


NO_EVIDENCE_MARKER = "NO EVIDENCE RETRIEVED"


def build_rag_prompt(
    payload: PayloadRecord,
    table: ClassificationTable,
    features: FeatureVector,
    evidence: list[ScoredChunk],
    probed_class: AttackClass,
) -> ChatRequest:
    """Assemble the verification prompt for one probed class."""
    if probed_class is AttackClass.NONE:
        raise InvalidClass("verification always targets a concrete class")
    if evidence:
        evidence_text = "\n".join(
            f"[{sc.chunk.chunk_id}] ({sc.chunk.doc_path}) {sc.chunk.text}"
            for sc in evidence
        )
    else:
        evidence_text = NO_EVIDENCE_MARKER

    system = _load_template("rag_system.txt").strip()
    user = _load_template("rag_user.txt").format(
        query=payload.normalized,
        sql_probability=_fmt_probability(table.probability_of(AttackClass.SQLI)),
        ssti_probability=_fmt_probability(table.probability_of(AttackClass.SSTI)),
        xss_probability=_fmt_probability(table.probability_of(AttackClass.XSS)),
        probed_class=probed_class.label,
        features_json=json.dumps(features.to_dict()),
        evidence=evidence_text,
    )
    return ChatRequest(model="", messages=[("system", system), ("user", user)])


def parse_decision(content: str) -> tuple[Decision, AttackClass | None, str]:
    """Parse the model's first-line CONFIRM/REJECT/ABSTAIN grammar.

    Anything that doesn't parse counts as an abstention with the full content
    as justification.
    """
    lines = content.splitlines() or [""]
    first = lines[0].strip()
    rest = "\n".join(lines[1:]).strip()
    parts = first.split()
    if parts:
        verb = parts[0].lower()
        if verb == "abstain":
            return Decision.ABSTAIN, None, rest or content.strip()
        if verb in ("confirm", "reject") and len(parts) >= 2:
            try:
                cls = AttackClass.from_name(parts[1])
            except KeyError:
                cls = None
            if cls is not None and cls is not AttackClass.NONE:
                return Decision[verb.upper()], cls, rest
    return Decision.ABSTAIN, None, content.strip()


class Orchestrator:
    """Wires the classifier pool, knowledge stores, and chat endpoint."""

    def __init__(
        self,
        bindings: list[ClassifierBinding],
        stores: StoreRegistry,
        embedder: Embedder,
        llm: ChatProvider,
    ):
        self.bindings = bindings
        self.stores = stores
        self.embedder = embedder
        self.llm = llm

    def analyze(
        self,
        payload: PayloadRecord,
        config: OrchestratorConfig | None = None,
        use_retrieval: bool = True,
    ) -> Verdict:
        """Run the classify -> retrieve -> verify loop for one payload.

        ``use_retrieval=False`` is the ablation mode: the loop runs unchanged
        but the evidence list handed to the prompt (and to reporting) is
        forced empty.
        """
        config = config or OrchestratorConfig()
        features = extract_features(payload.normalized)
        table = classify_all(payload, self.bindings)
        original = table

        trace: list[LoopStep] = []
        evidence: list[ScoredChunk] = []
        query_vec = None

        candidate = f_max(table)
        first_candidate = candidate
        if candidate is AttackClass.NONE:
            return Verdict(
                payload_id=payload.id,
                final_class=AttackClass.NONE,
                candidate_class=AttackClass.NONE,
                confidence=0.0,
                justification="below confidence gate",
                evidence=[],
                feature_vector=features,
                iterations=1,
                trace=[],
            )

        iterations = 0
        while iterations < config.max_iterations:
            iterations += 1
            step_evidence: list[ScoredChunk] = []
            if use_retrieval:
                store = self.stores.get(candidate)
                if store is None:
                    raise StoreUninitialized(f"no knowledge store for {candidate.label}")
                if query_vec is None:
                    query_vec = self.embedder.embed([payload.normalized])[0]
                step_evidence = mmr_retrieve(
                    store, query_vec, config.retrieve_k, config.mmr_lambda
                )
            request = build_rag_prompt(payload, table, features, step_evidence, candidate)
            try:
                response = self.llm.chat(request)
            except EndpointUnavailable as exc:
                exc.trace = trace
                raise
            decision, decided_class, justification = parse_decision(response.content)
            if decision is Decision.ABSTAIN:
                decision = (
                    Decision.REJECT
                    if config.abstain_policy is AbstainPolicy.TREAT_AS_REJECT
                    else Decision.CONFIRM
                )
                recorded = Decision.ABSTAIN
            else:
                recorded = decision
            trace.append(
                LoopStep(
                    step_index=iterations,
                    probed_class=candidate,
                    retrieved_count=len(step_evidence),
                    llm_decision=recorded,
                    llm_raw=response.content,
                )
            )
            evidence.extend(step_evidence)

            if decision is Decision.CONFIRM:
                return Verdict(
                    payload_id=payload.id,
                    final_class=candidate,
                    candidate_class=first_candidate,
                    confidence=original.probability_of(candidate),
                    justification=justification or f"verified as {candidate.label}",
                    evidence=evidence,
                    feature_vector=features,
                    iterations=iterations,
                    trace=trace,
                )

            # Rejection: permanently mask this class and re-run the argmax.
            table = table.masked(candidate)
            candidate = f_max(table)
            if candidate is AttackClass.NONE:
                return Verdict(
                    payload_id=payload.id,
                    final_class=AttackClass.NONE,
                    candidate_class=first_candidate,
                    confidence=0.0,
                    justification="rejected by verification",
                    evidence=evidence,
                    feature_vector=features,
                    iterations=iterations,
                    trace=trace,
                )

        return Verdict(
            payload_id=payload.id,
            final_class=AttackClass.NONE,
            candidate_class=first_candidate,
            confidence=0.0,
            justification="rejected by verification (iteration budget exhausted)",
            evidence=evidence,
            feature_vector=features,
            iterations=iterations,
            trace=trace,
        )
