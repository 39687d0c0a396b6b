"""Single seam to external model endpoints.

Everything that talks to a chat-completion or embeddings server goes through
here. The scripted stub serves the same chat interface in-process from an
ordered pattern -> response rule file, which is what the offline test suite
and the acceptance gate run against.
"""

from __future__ import annotations

import json
import math
import random
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import requests

from .errors import (
    DimensionMismatch,
    EmbedderUnavailable,
    EndpointUnavailable,
    InvalidParams,
    MalformedResponse,
    RuleFileInvalid,
)
from .knowledge import EmbeddingVector

VALID_ROLES = ("system", "user", "assistant")


@dataclass
class ChatRequest:
    model: str
    messages: list[tuple[str, str]]
    temperature: float = 0.0
    max_tokens: int | None = None

    def __post_init__(self):
        if not self.messages:
            raise InvalidParams("chat request needs at least one message")
        for role, _ in self.messages:
            if role not in VALID_ROLES:
                raise InvalidParams(f"unknown role {role!r}")

    def last_user_message(self) -> str:
        for role, content in reversed(self.messages):
            if role == "user":
                return content
        return ""


@dataclass
class ChatResponse:
    content: str
    finish_reason: str = "stop"
    latency_ms: int = 0


@dataclass
class EndpointConfig:
    base_url: str
    model: str
    timeout_ms: int = 30000
    max_retries: int = 2

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise InvalidParams("timeout_ms must be positive")


class ChatProvider(Protocol):
    def chat(self, request: ChatRequest) -> ChatResponse: ...


def _backoff_sleep(attempt: int, rng: random.Random) -> None:
    # base 250 ms, doubling, +/-20% jitter
    base = 0.25 * (2 ** attempt)
    time.sleep(base * rng.uniform(0.8, 1.2))


def chat(endpoint: EndpointConfig, request: ChatRequest) -> ChatResponse:
    """POST a chat-completion request, retrying on network failure and 5xx."""
    body = {
        "model": endpoint.model or request.model,
        "messages": [{"role": r, "content": c} for r, c in request.messages],
        "temperature": request.temperature,
        "stream": False,
    }
    if request.max_tokens is not None:
        body["max_tokens"] = request.max_tokens

    rng = random.Random()
    last_error: Exception | None = None
    for attempt in range(endpoint.max_retries + 1):
        if attempt:
            _backoff_sleep(attempt - 1, rng)
        started = time.monotonic()
        try:
            resp = requests.post(
                endpoint.base_url.rstrip("/") + "/v1/chat/completions",
                json=body,
                timeout=endpoint.timeout_ms / 1000.0,
            )
            if resp.status_code >= 500:
                last_error = EndpointUnavailable(f"server error {resp.status_code}")
                continue
            resp.raise_for_status()
            payload = resp.json()
            try:
                content = payload["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError) as exc:
                raise MalformedResponse(f"reply lacks message content: {exc}") from exc
            latency = int((time.monotonic() - started) * 1000)
            finish = payload["choices"][0].get("finish_reason", "stop")
            return ChatResponse(content=content, finish_reason=finish, latency_ms=latency)
        except MalformedResponse:
            raise
        except requests.RequestException as exc:
            last_error = exc
    raise EndpointUnavailable(f"chat endpoint unavailable: {last_error}")


class HttpChatProvider:
    def __init__(self, endpoint: EndpointConfig):
        self.endpoint = endpoint

    def chat(self, request: ChatRequest) -> ChatResponse:
        return chat(self.endpoint, request)


def embed_remote(endpoint: EndpointConfig, texts: list[str]) -> list[EmbeddingVector]:
    """Fetch embeddings for a batch of texts, order-preserving, L2-normalized."""
    if not texts:
        raise InvalidParams("texts must be non-empty")
    try:
        resp = requests.post(
            endpoint.base_url.rstrip("/") + "/v1/embeddings",
            json={"model": endpoint.model, "input": list(texts)},
            timeout=endpoint.timeout_ms / 1000.0,
        )
        resp.raise_for_status()
        data = resp.json()["data"]
    except requests.RequestException as exc:
        raise EndpointUnavailable(f"embeddings endpoint unavailable: {exc}") from exc
    except (KeyError, ValueError) as exc:
        raise MalformedResponse(f"bad embeddings reply: {exc}") from exc

    vectors = []
    dimension = None
    for item in data:
        values = [float(v) for v in item["embedding"]]
        if dimension is None:
            dimension = len(values)
        elif len(values) != dimension:
            raise DimensionMismatch("server returned ragged vectors")
        norm = math.sqrt(math.fsum(v * v for v in values))
        if norm > 0:
            values = [v / norm for v in values]
        vectors.append(EmbeddingVector(values))
    if len(vectors) != len(texts):
        raise MalformedResponse("embedding count does not match input count")
    return vectors


class RemoteEmbedder:
    def __init__(self, endpoint: EndpointConfig, dimension: int):
        self.endpoint = endpoint
        self._dimension = dimension

    @property
    def dimension(self) -> int:
        return self._dimension

    def embed(self, texts: list[str]) -> list[EmbeddingVector]:
        if not texts:
            return []
        vectors = embed_remote(self.endpoint, texts)
        for v in vectors:
            if v.dimension != self._dimension:
                raise EmbedderUnavailable(
                    f"server dimension {v.dimension} != configured {self._dimension}"
                )
        return vectors


@dataclass
class StubRule:
    pattern: re.Pattern
    response: str


class ScriptedStub:
    """In-process chat endpoint driven by an ordered rule table.

    The last user message is matched against each rule's regex in order; the
    first hit wins and its response template is expanded with the regex's
    captured groups. The final rule must be a catch-all so every request gets
    a deterministic answer.
    """

    def __init__(self, rules: list[StubRule]):
        if not rules:
            raise RuleFileInvalid("rule table is empty")
        last = rules[-1]
        if last.pattern.pattern not in (".*", "(?s).*") and not last.pattern.search(""):
            raise RuleFileInvalid("final rule must be a catch-all")
        self.rules = rules

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedStub":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
            rules = [
                StubRule(re.compile(r["pattern"], re.IGNORECASE | re.DOTALL), r["response"])
                for r in raw["rules"]
            ]
        except (OSError, ValueError, KeyError, re.error) as exc:
            raise RuleFileInvalid(f"cannot load stub rules from {path}: {exc}") from exc
        return cls(rules)

    def chat(self, request: ChatRequest) -> ChatResponse:
        message = request.last_user_message()
        for rule in self.rules:
            match = rule.pattern.search(message)
            if match:
                return ChatResponse(content=match.expand(rule.response))
        raise RuleFileInvalid("no rule matched despite catch-all")  # pragma: no cover
