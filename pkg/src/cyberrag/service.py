"""HTTP service: the integration surface an IDS (or the analyst console) talks to.

Endpoints (all JSON):
    POST /api/v1/alerts                     submit a payload, get an alert_id
    GET  /api/v1/alerts                     stored report summaries (queue view)
    GET  /api/v1/alerts/{id}/status         pending/done/failed (async mode)
    GET  /api/v1/reports/{id}               full StoredReport
    POST /api/v1/sessions                   open a chat session on an alert
    POST /api/v1/sessions/{id}/messages     ask one question
    GET  /api/v1/health                     dependency status + KB chunk counts
    POST /api/v1/admin/ingest               re-ingest the knowledge base
"""

from __future__ import annotations

import threading
import uuid
from concurrent.futures import ThreadPoolExecutor

import requests
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .chat import ChatService, Expertise
from .classifiers import default_bindings
from .config import ServiceConfig
from .errors import (
    CyberRagError,
    EndpointUnavailable,
    InvalidParams,
    SessionClosed,
    UnknownAlert,
)
from .gateway import HttpChatProvider, RemoteEmbedder, ScriptedStub
from .knowledge import HashEmbedder, StoreRegistry
from .orchestrator import Orchestrator
from .payload import PayloadRecord
from .reporting import build_attack_representation, render_report
from .storage import ReportStore, StoredReport

MAX_PAYLOAD_BYTES = 1 << 20  # submissions above 1 MiB are rejected


class AlertRequest(BaseModel):
    payload: str
    source: str | None = None


class SessionRequest(BaseModel):
    alert_id: str
    expertise: str = "intermediate"


class MessageRequest(BaseModel):
    message: str


class AppState:
    """Everything the endpoints share: wired components plus async bookkeeping."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.embedder = config.make_embedder()
        self.llm = config.make_llm()
        self.stores = StoreRegistry(dimension=config.embed_dimension)
        self.reports = ReportStore(config.report_store_path)
        self.orchestrator = Orchestrator(
            bindings=config.classifier_bindings or default_bindings(),
            stores=self.stores,
            embedder=self.embedder,
            llm=self.llm,
        )
        self.chat = ChatService(
            reports=self.reports,
            stores=self.stores,
            embedder=self.embedder,
            llm=self.llm,
            retrieve_k=config.orchestrator.retrieve_k,
            mmr_lambda=config.orchestrator.mmr_lambda,
        )
        self.alert_status: dict[str, str] = {}
        self._status_lock = threading.Lock()
        self._pool = ThreadPoolExecutor(max_workers=4) if config.async_alerts else None

    def ingest(self) -> dict:
        return self.stores.ingest(self.config.kb_root, self.embedder).to_dict()

    def _set_status(self, alert_id: str, status: str) -> None:
        with self._status_lock:
            self.alert_status[alert_id] = status

    def process_alert(self, alert_id: str, payload_text: str, source: str | None) -> None:
        record = PayloadRecord.create(alert_id, payload_text, source)
        verdict = self.orchestrator.analyze(record, self.config.orchestrator)
        rep = build_attack_representation(verdict, record)
        doc, _ = render_report(rep, alert_id, mode="json")
        self.reports.append(
            StoredReport(alert_id=alert_id, report=doc, verdict=verdict, payload=record)
        )
        self._set_status(alert_id, "done")

    def submit_alert(self, payload_text: str, source: str | None) -> str:
        alert_id = uuid.uuid4().hex
        self._set_status(alert_id, "pending")
        if self._pool is None:
            self.process_alert(alert_id, payload_text, source)
        else:
            def run():
                try:
                    self.process_alert(alert_id, payload_text, source)
                except Exception:
                    self._set_status(alert_id, "failed")

            self._pool.submit(run)
        return alert_id


def _ping_chat(provider) -> str:
    if isinstance(provider, ScriptedStub):
        return "up"
    if isinstance(provider, HttpChatProvider):
        return _ping_url(provider.endpoint.base_url)
    return "up"


def _ping_embed(embedder) -> str:
    if isinstance(embedder, HashEmbedder):
        return "up"
    if isinstance(embedder, RemoteEmbedder):
        return _ping_url(embedder.endpoint.base_url)
    return "up"


def _ping_url(base_url: str) -> str:
    try:
        requests.head(base_url, timeout=2.0)
        return "up"
    except requests.RequestException:
        return "down"


def create_app(
    config: ServiceConfig | None = None,
    ingest_on_startup: bool = True,
    static_root: str | None = None,
) -> FastAPI:
    config = config or ServiceConfig()
    state = AppState(config)
    if ingest_on_startup:
        state.ingest()

    app = FastAPI(title="cyberrag", version="1.0")
    app.state.cyberrag = state

    @app.post("/api/v1/alerts", status_code=201)
    def submit_alert(body: AlertRequest):
        if not body.payload.strip():
            raise HTTPException(status_code=400, detail="payload must be non-empty")
        if len(body.payload.encode("utf-8")) > MAX_PAYLOAD_BYTES:
            raise HTTPException(status_code=413, detail="payload exceeds 1 MiB")
        if not state.stores.ready():
            raise HTTPException(status_code=503, detail="knowledge stores not ingested")
        try:
            alert_id = state.submit_alert(body.payload, body.source)
        except EndpointUnavailable as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc
        return {"alert_id": alert_id}

    @app.get("/api/v1/alerts")
    def list_alerts():
        return {"alerts": state.reports.summaries()}

    @app.get("/api/v1/alerts/{alert_id}/status")
    def alert_status(alert_id: str):
        status = state.alert_status.get(alert_id)
        if status is None:
            raise HTTPException(status_code=404, detail=f"unknown alert {alert_id}")
        return {"alert_id": alert_id, "status": status}

    @app.get("/api/v1/reports/{alert_id}")
    def get_report(alert_id: str):
        try:
            return state.reports.get(alert_id).to_dict()
        except UnknownAlert as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.post("/api/v1/sessions", status_code=201)
    def open_session(body: SessionRequest):
        try:
            expertise = Expertise(body.expertise)
        except ValueError:
            raise HTTPException(status_code=400, detail=f"unknown expertise {body.expertise!r}")
        try:
            session = state.chat.open_session(body.alert_id, expertise)
        except UnknownAlert as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return {"session_id": session.session_id}

    @app.post("/api/v1/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageRequest):
        session = state.chat.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        try:
            answer = state.chat.ask(session, body.message)
        except InvalidParams as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except SessionClosed as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except EndpointUnavailable as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc
        return {"answer": answer}

    @app.get("/api/v1/health")
    def health():
        return {
            "llm": _ping_chat(state.llm),
            "embed": _ping_embed(state.embedder),
            "kb": state.stores.chunk_counts(),
        }

    @app.post("/api/v1/admin/ingest")
    def admin_ingest():
        try:
            return state.ingest()
        except CyberRagError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc

    if static_root:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_root, html=True), name="console")

    return app
