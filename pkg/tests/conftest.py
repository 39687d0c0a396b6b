"""Shared fixtures: offline components and a tiny classifier HTTP server."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from cyberrag.classifiers import BindingKind, ClassifierBinding, default_bindings
from cyberrag.config import ServiceConfig, bundled_corpus, bundled_stub_rules
from cyberrag.gateway import ScriptedStub
from cyberrag.knowledge import HashEmbedder, StoreRegistry
from cyberrag.orchestrator import Orchestrator
from cyberrag.payload import AttackClass

# Payloads PD001 and PD003 with their published per-class probabilities.
PD001 = "1%\" ) ) waitfor delay '0:0:5' and ( ( \"%\" = \"}"
PD003 = "<time onpointermove=alert(1)>XSS</time>"
PD001_SCORES = {"ssti": 0.3956, "sqli": 0.9999, "xss": 0.0673}
PD003_SCORES = {"ssti": 0.3929, "sqli": 0.3998, "xss": 0.9999}


@pytest.fixture(scope="session")
def embedder():
    return HashEmbedder()


@pytest.fixture(scope="session")
def stub():
    return ScriptedStub.from_file(bundled_stub_rules())


@pytest.fixture(scope="session")
def stores(embedder):
    registry = StoreRegistry(dimension=embedder.dimension)
    registry.ingest(ServiceConfig().kb_root, embedder)
    return registry


@pytest.fixture(scope="session")
def orchestrator(stores, embedder, stub):
    return Orchestrator(default_bindings(), stores, embedder, stub)


class _ScoreHandler(BaseHTTPRequestHandler):
    """Serves /{class} with a fixed probability table keyed on the payload."""

    tables: dict[str, dict[str, float]] = {}

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length) or b"{}")
        cls = self.path.strip("/")
        table = self.tables.get(body.get("payload", ""), {})
        reply = json.dumps(
            {"probability": table.get(cls, 0.0), "rationale": "fixture table"}
        ).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(reply)))
        self.end_headers()
        self.wfile.write(reply)

    def log_message(self, *args):  # keep pytest output clean
        pass


@pytest.fixture(scope="session")
def score_server():
    """HTTP server that scores PD001/PD003 with their published probabilities."""
    _ScoreHandler.tables = {PD001: PD001_SCORES, PD003: PD003_SCORES}
    server = HTTPServer(("127.0.0.1", 0), _ScoreHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


@pytest.fixture(scope="session")
def remote_bindings(score_server):
    return [
        ClassifierBinding(
            attack_class=cls,
            kind=BindingKind.REMOTE_HTTP,
            endpoint=f"{score_server}/{cls.label}",
        )
        for cls in (AttackClass.SSTI, AttackClass.SQLI, AttackClass.XSS)
    ]


@pytest.fixture(scope="session")
def clean_corpus_path():
    return bundled_corpus("clean.jsonl")
