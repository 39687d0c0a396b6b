"""Payload records, attack classes, normalization and feature extraction.

Everything here is a pure function over text: the same raw payload always
yields the same normalized form and the same feature vector. The keyword
lexicon and SQL shape regexes live in ``resources/lexicon.json`` so they can
be versioned independently of the code.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field, asdict
from datetime import datetime, timezone
from enum import Enum
from importlib import resources as importlib_resources
from urllib.parse import unquote


class AttackClass(Enum):
    """The registered attack families, plus `NONE` for benign traffic."""

    NONE = 0
    SSTI = 1
    SQLI = 2
    XSS = 3

    @property
    def code(self) -> int:
        return self.value

    @classmethod
    def from_code(cls, code: int) -> "AttackClass":
        return cls(code)

    @classmethod
    def from_name(cls, name: str) -> "AttackClass":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown attack class {name!r}") from None

    @property
    def label(self) -> str:
        return self.name.lower()


#: The three classes a classifier can actually claim.
ATTACK_CLASSES = (AttackClass.SSTI, AttackClass.SQLI, AttackClass.XSS)

#: Human-readable names used in prompts and reports.
CLASS_DISPLAY = {
    AttackClass.NONE: "No attack",
    AttackClass.SSTI: "Server-Side Template Injection",
    AttackClass.SQLI: "SQL Injection",
    AttackClass.XSS: "Cross-Site Scripting",
}


@dataclass
class PayloadRecord:
    """A candidate attack string as received from the IDS."""

    id: str
    raw: str
    normalized: str
    source: str | None = None
    received_at: datetime = field(
        default_factory=lambda: datetime.now(timezone.utc)
    )

    @classmethod
    def create(cls, payload_id: str, raw: str, source: str | None = None) -> "PayloadRecord":
        return cls(id=payload_id, raw=raw, normalized=normalize_payload(raw), source=source)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "raw": self.raw,
            "normalized": self.normalized,
            "source": self.source,
            "received_at": self.received_at.isoformat(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PayloadRecord":
        return cls(
            id=data["id"],
            raw=data["raw"],
            normalized=data["normalized"],
            source=data.get("source"),
            received_at=datetime.fromisoformat(data["received_at"]),
        )


@dataclass
class FeatureVector:
    sql_keywords_count: int = 0
    dynamic_values_count: int = 0
    sql_syntax_match: float = 0.0
    html_tag_count: int = 0
    script_event_handler_count: int = 0
    template_marker_count: int = 0
    quote_imbalance: int = 0
    paren_imbalance: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureVector":
        return cls(**data)

    def is_zero(self) -> bool:
        return all(v == 0 for v in asdict(self).values())


def _load_lexicon() -> dict:
    with importlib_resources.files("cyberrag.resources").joinpath("lexicon.json").open(
        "r", encoding="utf-8"
    ) as fh:
        return json.load(fh)


_LEXICON = _load_lexicon()
SQL_KEYWORDS = frozenset(_LEXICON["sql_keywords"])
SQL_SHAPES = [re.compile(p, re.IGNORECASE) for p in _LEXICON["sql_shapes"]]
TEMPLATE_MARKERS = list(_LEXICON["template_markers"])

_ENTITY_RE = re.compile(r"&(lt|gt|quot|amp|#x[0-9a-fA-F]+|#[0-9]+);")
_NAMED_ENTITIES = {"lt": "<", "gt": ">", "quot": '"', "amp": "&"}

_TOKEN_RE = re.compile(r"[a-zA-Z_][a-zA-Z0-9_]*")
_NUMERIC_RE = re.compile(r"(?<![\w.])\d+(?:\.\d+)?(?![\w.])")
_QUOTED_RE = re.compile(r"'[^']*'|\"[^\"]*\"")
_TAG_RE = re.compile(r"</?[a-zA-Z][a-zA-Z0-9]*(?:\s[^>]*)?/?>")
_EVENT_HANDLER_RE = re.compile(r"\bon[a-z]+=", re.IGNORECASE)


def _decode_entities(text: str) -> str:
    # Single left-to-right pass: entities produced by a decode are not
    # re-decoded (e.g. "&amp;lt;" -> "&lt;").
    def repl(m: re.Match) -> str:
        body = m.group(1)
        if body in _NAMED_ENTITIES:
            return _NAMED_ENTITIES[body]
        try:
            cp = int(body[2:], 16) if body[1] in "xX" else int(body[1:])
            return chr(cp)
        except (ValueError, OverflowError):
            return m.group(0)

    return _ENTITY_RE.sub(repl, text)


def normalize_payload(raw: str) -> str:
    """Canonicalize a payload for matching.

    Percent-decoding runs at most twice (stopping early when a pass changes
    nothing) so crafted double-encoded input is uncovered without risking
    unbounded decode chains. Named/numeric HTML entities are decoded in one
    pass, the text is NFKC-normalized, whitespace runs collapse to a single
    space, and the result is lowercased. The original casing stays available
    in ``PayloadRecord.raw``.
    """
    text = raw
    for _ in range(2):
        decoded = unquote(text, errors="replace")
        if decoded == text:
            break
        text = decoded
    text = _decode_entities(text)
    text = unicodedata.normalize("NFKC", text)
    text = re.sub(r"\s+", " ", text).strip()
    return text.lower()


def extract_features(normalized: str) -> FeatureVector:
    """Compute the class-specific feature vector over normalized text."""
    tokens = _TOKEN_RE.findall(normalized.lower())
    sql_keywords = sum(1 for t in tokens if t in SQL_KEYWORDS)

    dynamic = len(_NUMERIC_RE.findall(normalized)) + len(_QUOTED_RE.findall(normalized))
    syntax = 1.0 if any(p.search(normalized) for p in SQL_SHAPES) else 0.0
    tags = len(_TAG_RE.findall(normalized))
    handlers = len(_EVENT_HANDLER_RE.findall(normalized))
    markers = sum(normalized.count(m) for m in TEMPLATE_MARKERS)

    quotes = normalized.count("'")
    quote_imbalance = quotes % 2
    paren_imbalance = abs(normalized.count("(") - normalized.count(")"))

    return FeatureVector(
        sql_keywords_count=sql_keywords,
        dynamic_values_count=dynamic,
        sql_syntax_match=syntax,
        html_tag_count=tags,
        script_event_handler_count=handlers,
        template_marker_count=markers,
        quote_imbalance=quote_imbalance,
        paren_imbalance=paren_imbalance,
    )


def matched_sql_shapes(normalized: str) -> list[int]:
    """Indexes of the SQL shape regexes that fire on this text."""
    return [i for i, p in enumerate(SQL_SHAPES) if p.search(normalized)]


def bucket_count(value: int) -> str:
    """Presentation bucketing for counts: 0 -> None, 1-2 -> Low, >=3 -> High."""
    if value == 0:
        return "None"
    return "Low" if value <= 2 else "High"


def bucket_match(value: float) -> str:
    """Presentation bucketing for the 0/1 sql_syntax_match flag."""
    return "High" if value >= 1 else "None"
