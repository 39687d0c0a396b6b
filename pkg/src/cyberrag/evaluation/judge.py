"""LLM-as-judge scoring of generated explanations."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources as importlib_resources

from ..errors import MalformedJudgeReply
from ..gateway import ChatProvider, ChatRequest
from ..payload import AttackClass, CLASS_DISPLAY


@dataclass
class JudgeScores:
    pattern_recognition: float
    contextualization: float
    terminology_use: float
    overall: float
    raw: str

    def to_dict(self) -> dict:
        return {
            "pattern_recognition": self.pattern_recognition,
            "contextualization": self.contextualization,
            "terminology_use": self.terminology_use,
            "overall": self.overall,
        }


def _load_template() -> str:
    with importlib_resources.files("cyberrag.resources.templates").joinpath(
        "judge_prompt.txt"
    ).open("r", encoding="utf-8") as fh:
        return fh.read()


_JSON_RE = re.compile(r"\{.*\}", re.DOTALL)


def _clamp(value: float, flagged: list[str], name: str) -> float:
    if 1.0 <= value <= 5.0:
        return value
    flagged.append(f"{name}={value} clamped")
    return min(5.0, max(1.0, value))


def judge(
    explanation: str,
    payload: str,
    label: AttackClass,
    judge_endpoint: ChatProvider,
) -> JudgeScores:
    """Score an explanation on the three rubric criteria (1-5 scale).

    A malformed reply is retried once; out-of-range values are clamped to
    [1, 5] and flagged in ``raw``.
    """
    prompt = _load_template().format(
        payload=payload,
        label=CLASS_DISPLAY[label],
        explanation=explanation,
    )
    request = ChatRequest(model="", messages=[("user", prompt)])
    last_error: Exception | None = None
    for _ in range(2):
        response = judge_endpoint.chat(request)
        match = _JSON_RE.search(response.content)
        if not match:
            last_error = MalformedJudgeReply("no JSON object in judge reply")
            continue
        try:
            body = json.loads(match.group(0))
            pattern = float(body["pattern_recognition"])
            context = float(body["contextualization"])
            terminology = float(body["terminology_use"])
            overall = float(body["overall"]) if "overall" in body else (
                (pattern + context + terminology) / 3.0
            )
        except (ValueError, KeyError, TypeError) as exc:
            last_error = MalformedJudgeReply(f"bad judge JSON: {exc}")
            continue
        flagged: list[str] = []
        scores = JudgeScores(
            pattern_recognition=_clamp(pattern, flagged, "pattern_recognition"),
            contextualization=_clamp(context, flagged, "contextualization"),
            terminology_use=_clamp(terminology, flagged, "terminology_use"),
            overall=_clamp(overall, flagged, "overall"),
            raw=response.content + ("".join(f" [{f}]" for f in flagged)),
        )
        return scores
    raise last_error or MalformedJudgeReply("judge reply unusable")
