"""CyberRAG: agentic retrieval-augmented triage for web-attack payloads.

The pipeline classifies a payload with per-class classifiers, retrieves
supporting knowledge for the top candidate, verifies the candidate with an
LLM (or the bundled scripted stub), and renders an analyst-facing incident
report. See the README for the CLI and HTTP service.
"""

from .payload import (
    ATTACK_CLASSES,
    AttackClass,
    FeatureVector,
    PayloadRecord,
    extract_features,
    normalize_payload,
)
from .classifiers import (
    ClassificationTable,
    ClassifierBinding,
    ClassScore,
    classify_all,
    default_bindings,
    f_max,
    reference_rule_score,
)
from .knowledge import (
    Chunk,
    EmbeddingVector,
    HashEmbedder,
    ScoredChunk,
    StoreRegistry,
    VectorStore,
    chunk_document,
    cosine,
    hash_embed,
    mmr_retrieve,
)
from .gateway import (
    ChatRequest,
    ChatResponse,
    EndpointConfig,
    HttpChatProvider,
    RemoteEmbedder,
    ScriptedStub,
)
from .orchestrator import (
    AbstainPolicy,
    Decision,
    Orchestrator,
    OrchestratorConfig,
    Verdict,
    build_rag_prompt,
    parse_decision,
)
from .reporting import (
    AttackRepresentation,
    ReportDocument,
    build_attack_representation,
    build_report_document,
    render_report,
)
from .storage import ReportStore, StoredReport
from .chat import ChatService, ChatSession, Expertise
from .config import ServiceConfig, load_config
from . import errors

__version__ = "1.0.0"

__all__ = [
    "ATTACK_CLASSES",
    "AbstainPolicy",
    "AttackClass",
    "AttackRepresentation",
    "ChatRequest",
    "ChatResponse",
    "ChatService",
    "ChatSession",
    "Chunk",
    "ClassScore",
    "ClassificationTable",
    "ClassifierBinding",
    "Decision",
    "EmbeddingVector",
    "EndpointConfig",
    "Expertise",
    "FeatureVector",
    "HashEmbedder",
    "HttpChatProvider",
    "Orchestrator",
    "OrchestratorConfig",
    "PayloadRecord",
    "RemoteEmbedder",
    "ReportDocument",
    "ReportStore",
    "ScoredChunk",
    "ScriptedStub",
    "ServiceConfig",
    "StoreRegistry",
    "StoredReport",
    "VectorStore",
    "Verdict",
    "build_attack_representation",
    "build_rag_prompt",
    "build_report_document",
    "chunk_document",
    "classify_all",
    "cosine",
    "default_bindings",
    "errors",
    "extract_features",
    "f_max",
    "hash_embed",
    "load_config",
    "mmr_retrieve",
    "normalize_payload",
    "parse_decision",
    "reference_rule_score",
    "render_report",
]
