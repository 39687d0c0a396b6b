"""Seeded adversarial perturbation operators.

Each operator is deterministic under a fixed seed and only rewrites the
payload text; ground-truth labels are never touched. Operators compose in
the order listed by the caller.
"""

from __future__ import annotations

import random
import re

from ..errors import InvalidParams
from ..payload import SQL_KEYWORDS


def _case_flip(text: str, rng: random.Random) -> str:
    return "".join(
        c.swapcase() if c.isalpha() and rng.random() < 0.3 else c for c in text
    )


def _url_encode(text: str, rng: random.Random) -> str:
    out = []
    for c in text:
        encodable = ord(c) < 128
        if encodable and rng.random() < 0.3:
            out.append("".join(f"%{b:02X}" for b in c.encode("utf-8")))
        else:
            out.append(c)
    return "".join(out)


def _html_entity_encode(text: str, rng: random.Random) -> str:
    table = {"<": "&lt;", ">": "&gt;", '"': "&quot;", "&": "&amp;"}
    return "".join(table.get(c, c) for c in text)


def _whitespace_inflate(text: str, rng: random.Random) -> str:
    return "".join(c + " " if c == " " and rng.random() < 0.5 else c for c in text)


_KEYWORD_RE = re.compile(
    r"\b(" + "|".join(sorted(SQL_KEYWORDS, key=len, reverse=True)) + r")\b",
    re.IGNORECASE,
)


def _comment_inject(text: str, rng: random.Random) -> str:
    return _KEYWORD_RE.sub(lambda m: m.group(0) + "/**/", text)


def _token_swap(text: str, rng: random.Random) -> str:
    tokens = text.split(" ")
    swappable = [
        i
        for i in range(len(tokens) - 1)
        if tokens[i].lower() not in SQL_KEYWORDS
        and tokens[i + 1].lower() not in SQL_KEYWORDS
    ]
    if swappable:
        i = rng.choice(swappable)
        tokens[i], tokens[i + 1] = tokens[i + 1], tokens[i]
    return " ".join(tokens)


PERTURB_OPS = {
    "case_flip": _case_flip,
    "url_encode": _url_encode,
    "html_entity_encode": _html_entity_encode,
    "whitespace_inflate": _whitespace_inflate,
    "comment_inject": _comment_inject,
    "token_swap": _token_swap,
}


def perturb(payload: str, ops: list[str], seed: int) -> str:
    """Apply the listed operators in order, each seeded-deterministic."""
    if not ops:
        raise InvalidParams("ops must be non-empty")
    unknown = [op for op in ops if op not in PERTURB_OPS]
    if unknown:
        raise InvalidParams(f"unknown perturbation ops: {unknown}")
    rng = random.Random(seed)
    text = payload
    for op in ops:
        text = PERTURB_OPS[op](text, rng)
    return text
