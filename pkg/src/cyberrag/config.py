"""Service configuration: file loading, env overrides, and component wiring.

The config file is plain JSON mirroring ServiceConfig. Every key is optional;
missing endpoint entries fall back to the bundled offline substitutes (hash
embedder, scripted chat stub), which is also what a bare ``ServiceConfig()``
gives you. Environment variables (CYBERRAG_LLM_URL and friends) override
whatever the file says.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path

from .classifiers import BindingKind, ClassifierBinding, default_bindings
from .errors import ConfigError
from .gateway import EndpointConfig, RemoteEmbedder, ScriptedStub
from .knowledge import DEFAULT_DIMENSION, HashEmbedder
from .orchestrator import AbstainPolicy, OrchestratorConfig
from .payload import AttackClass

_ENV_KEYS = {
    "llm": ("CYBERRAG_LLM_URL", "CYBERRAG_LLM_MODEL"),
    "embed": ("CYBERRAG_EMBED_URL", "CYBERRAG_EMBED_MODEL"),
    "judge": ("CYBERRAG_JUDGE_URL", "CYBERRAG_JUDGE_MODEL"),
}


def bundled_kb_root() -> Path:
    """Path of the knowledge-base corpus shipped inside the package."""
    return Path(str(importlib_resources.files("cyberrag.data").joinpath("kb")))


def bundled_stub_rules() -> Path:
    return Path(str(importlib_resources.files("cyberrag.data").joinpath("stub_rules.json")))


def bundled_corpus(name: str) -> Path:
    return Path(str(importlib_resources.files("cyberrag.data").joinpath(f"corpus/{name}")))


def bundled_fixture(name: str) -> Path:
    return Path(str(importlib_resources.files("cyberrag.data").joinpath(f"fixtures/{name}")))


@dataclass
class ServiceConfig:
    listen_addr: str = "127.0.0.1:8000"
    kb_root: str = ""
    orchestrator: OrchestratorConfig = field(default_factory=OrchestratorConfig)
    endpoints: dict[str, EndpointConfig | None] = field(
        default_factory=lambda: {"llm": None, "embed": None, "judge": None}
    )
    report_store_path: str = "cyberrag_reports.jsonl"
    classifier_bindings: list[ClassifierBinding] = field(default_factory=default_bindings)
    embed_dimension: int = DEFAULT_DIMENSION
    async_alerts: bool = False
    consistency_tau: float = 0.5

    def __post_init__(self):
        if not self.kb_root:
            self.kb_root = str(bundled_kb_root())
        host_port(self.listen_addr)  # validate early

    def make_embedder(self):
        endpoint = self.endpoints.get("embed")
        if endpoint is None:
            return HashEmbedder(self.embed_dimension)
        return RemoteEmbedder(endpoint, self.embed_dimension)

    def make_llm(self):
        endpoint = self.endpoints.get("llm")
        if endpoint is None:
            return ScriptedStub.from_file(bundled_stub_rules())
        from .gateway import HttpChatProvider

        return HttpChatProvider(endpoint)

    def make_judge(self):
        endpoint = self.endpoints.get("judge")
        if endpoint is None:
            return ScriptedStub.from_file(bundled_stub_rules())
        from .gateway import HttpChatProvider

        return HttpChatProvider(endpoint)


def host_port(listen_addr: str) -> tuple[str, int]:
    host, sep, port = listen_addr.rpartition(":")
    if not sep or not host:
        raise ConfigError(f"listen_addr must be host:port, got {listen_addr!r}")
    try:
        return host, int(port)
    except ValueError:
        raise ConfigError(f"listen_addr port is not a number: {listen_addr!r}") from None


def _endpoint_from_dict(data: dict) -> EndpointConfig:
    try:
        return EndpointConfig(
            base_url=data["base_url"],
            model=data.get("model", ""),
            timeout_ms=int(data.get("timeout_ms", 30000)),
            max_retries=int(data.get("max_retries", 2)),
        )
    except KeyError as exc:
        raise ConfigError(f"endpoint entry missing {exc}") from None


def _binding_from_dict(data: dict) -> ClassifierBinding:
    try:
        cls = AttackClass.from_name(data["attack_class"])
        kind = BindingKind(data.get("kind", "reference_rules"))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad classifier binding: {exc}") from None
    return ClassifierBinding(
        attack_class=cls,
        kind=kind,
        endpoint=data.get("endpoint"),
        timeout_ms=int(data.get("timeout_ms", 5000)),
    )


def _apply_env(endpoints: dict[str, EndpointConfig | None]) -> None:
    for name, (url_key, model_key) in _ENV_KEYS.items():
        url = os.environ.get(url_key)
        model = os.environ.get(model_key)
        if url:
            current = endpoints.get(name)
            endpoints[name] = EndpointConfig(
                base_url=url,
                model=model or (current.model if current else ""),
                timeout_ms=current.timeout_ms if current else 30000,
                max_retries=current.max_retries if current else 2,
            )
        elif model and endpoints.get(name) is not None:
            endpoints[name].model = model


def load_config(path: str | Path | None = None) -> ServiceConfig:
    """Build a ServiceConfig from an optional JSON file plus env overrides."""
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")

    orch_raw = raw.get("orchestrator", {})
    orchestrator = OrchestratorConfig(
        max_iterations=int(orch_raw.get("max_iterations", 3)),
        retrieve_k=int(orch_raw.get("retrieve_k", 4)),
        mmr_lambda=float(orch_raw.get("mmr_lambda", 0.5)),
        abstain_policy=AbstainPolicy(orch_raw.get("abstain_policy", "treat_as_reject")),
    )

    endpoints: dict[str, EndpointConfig | None] = {"llm": None, "embed": None, "judge": None}
    for name, entry in raw.get("endpoints", {}).items():
        if name not in endpoints:
            raise ConfigError(f"unknown endpoint name {name!r}")
        endpoints[name] = _endpoint_from_dict(entry) if entry else None
    _apply_env(endpoints)

    bindings = default_bindings()
    if "classifier_bindings" in raw:
        bindings = [_binding_from_dict(b) for b in raw["classifier_bindings"]]

    return ServiceConfig(
        listen_addr=raw.get("listen_addr", "127.0.0.1:8000"),
        kb_root=raw.get("kb_root", ""),
        orchestrator=orchestrator,
        endpoints=endpoints,
        report_store_path=raw.get("report_store_path", "cyberrag_reports.jsonl"),
        classifier_bindings=bindings,
        embed_dimension=int(raw.get("embed_dimension", DEFAULT_DIMENSION)),
        async_alerts=bool(raw.get("async_alerts", False)),
        consistency_tau=float(raw.get("consistency_tau", 0.5)),
    )
