"""Analyst-facing QA over a finished report.

Each session is bound to one stored report. Every question triggers a fresh
MMR retrieval against the verdict's class store (query = the question), and
the assembled prompt carries the report JSON, the verdict trace, the
retrieved chunks, and the capped conversation history. Asks within one
session are serialized with a per-session lock; the underlying report is
never mutated.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from importlib import resources as importlib_resources

from .errors import InvalidParams, SessionClosed
from .gateway import ChatProvider, ChatRequest
from .knowledge import Embedder, StoreRegistry, mmr_retrieve
from .payload import AttackClass
from .storage import ReportStore, StoredReport

DEFAULT_MAX_TURNS = 16


class Expertise(Enum):
    NOVICE = "novice"
    INTERMEDIATE = "intermediate"
    ADVANCED = "advanced"


@dataclass
class ChatSession:
    session_id: str
    alert_id: str
    expertise: Expertise = Expertise.INTERMEDIATE
    history: list[tuple[str, str]] = field(default_factory=list)
    created_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))
    max_turns: int = DEFAULT_MAX_TURNS
    closed: bool = False
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def append_turn(self, question: str, answer: str) -> None:
        self.history.append(("user", question))
        self.history.append(("assistant", answer))
        cap = 2 * self.max_turns
        if len(self.history) > cap:
            del self.history[: len(self.history) - cap]


def _system_template(expertise: Expertise) -> str:
    name = f"chat_{expertise.value}.txt"
    with importlib_resources.files("cyberrag.resources.templates").joinpath(name).open(
        "r", encoding="utf-8"
    ) as fh:
        return fh.read().strip()


class ChatService:
    def __init__(
        self,
        reports: ReportStore,
        stores: StoreRegistry,
        embedder: Embedder,
        llm: ChatProvider,
        retrieve_k: int = 4,
        mmr_lambda: float = 0.5,
    ):
        self.reports = reports
        self.stores = stores
        self.embedder = embedder
        self.llm = llm
        self.retrieve_k = retrieve_k
        self.mmr_lambda = mmr_lambda
        self.sessions: dict[str, ChatSession] = {}

    def open_session(
        self, alert_id: str, expertise: Expertise = Expertise.INTERMEDIATE
    ) -> ChatSession:
        self.reports.get(alert_id)  # raises UnknownAlert
        session = ChatSession(session_id=uuid.uuid4().hex, alert_id=alert_id, expertise=expertise)
        self.sessions[session.session_id] = session
        return session

    def _build_prompt(
        self, session: ChatSession, record: StoredReport, message: str
    ) -> ChatRequest:
        verdict = record.verdict
        chunks = []
        if verdict.final_class is not AttackClass.NONE:
            store = self.stores.get(verdict.final_class)
            if store is not None and len(store):
                query = self.embedder.embed([message])[0]
                chunks = mmr_retrieve(store, query, self.retrieve_k, self.mmr_lambda)
        context_parts = [
            f"Incident report (id {record.report.report_id}):",
            json.dumps(record.report.to_dict(), sort_keys=True),
            f"Payload excerpt: {record.payload.raw[:256]}",
            f"Final class: {verdict.final_class.label}",
            f"Verdict trace: {verdict.trace_json()}",
        ]
        if chunks:
            context_parts.append("Retrieved knowledge:")
            context_parts += [f"[{sc.chunk.chunk_id}] {sc.chunk.text}" for sc in chunks]
        context_parts.append(f"Analyst question: {message}")
        messages: list[tuple[str, str]] = [("system", _system_template(session.expertise))]
        messages += session.history
        messages.append(("user", "\n".join(context_parts)))
        return ChatRequest(model="", messages=messages)

    def ask(self, session: ChatSession, message: str, debug: bool = False):
        """Answer one analyst question; returns the answer text.

        With ``debug=True`` returns ``(answer, outgoing_prompt)`` instead, so
        grounding can be inspected.
        """
        if session.closed or session.session_id not in self.sessions:
            raise SessionClosed(session.session_id)
        if not message.strip():
            raise InvalidParams("empty message")
        with session.lock:
            record = self.reports.get(session.alert_id)
            request = self._build_prompt(session, record, message)
            response = self.llm.chat(request)  # EndpointUnavailable leaves history unchanged
            session.append_turn(message, response.content)
        if debug:
            return response.content, request.last_user_message()
        return response.content
