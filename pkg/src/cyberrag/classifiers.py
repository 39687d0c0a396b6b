"""Per-class payload classifiers and the gated-argmax aggregation rule.

Each attack class gets one classifier binding. The reference rule classifier
is a logistic model over the deterministic feature vector (weights shipped in
``resources/rule_weights.json``); remote classifiers are plain HTTP endpoints.
A failing classifier degrades to probability 0 instead of aborting the table:
triage must keep moving even when one model is down.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from importlib import resources as importlib_resources

import requests

from .errors import ConfigError, EmptyTable, InvalidClass
from .payload import ATTACK_CLASSES, AttackClass, FeatureVector, PayloadRecord, extract_features


@dataclass
class ClassScore:
    attack_class: AttackClass
    probability: float
    rationale: str
    classifier_id: str


@dataclass
class ClassificationTable:
    payload_id: str
    scores: list[ClassScore]
    produced_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))

    def probability_of(self, attack_class: AttackClass) -> float:
        for score in self.scores:
            if score.attack_class is attack_class:
                return score.probability
        return 0.0

    def masked(self, attack_class: AttackClass) -> "ClassificationTable":
        """A copy with one class's score forced to 0 (verification veto)."""
        scores = [
            ClassScore(s.attack_class, 0.0, "rejected by verification", s.classifier_id)
            if s.attack_class is attack_class
            else s
            for s in self.scores
        ]
        return ClassificationTable(self.payload_id, scores, self.produced_at)


class BindingKind(Enum):
    REFERENCE_RULES = "reference_rules"
    REMOTE_HTTP = "remote_http"


@dataclass
class ClassifierBinding:
    attack_class: AttackClass
    kind: BindingKind = BindingKind.REFERENCE_RULES
    endpoint: str | None = None
    timeout_ms: int = 5000

    def __post_init__(self):
        if (self.endpoint is not None) != (self.kind is BindingKind.REMOTE_HTTP):
            raise ConfigError("endpoint must be present exactly when kind is remote_http")


def _load_weights() -> dict:
    with importlib_resources.files("cyberrag.resources").joinpath(
        "rule_weights.json"
    ).open("r", encoding="utf-8") as fh:
        return json.load(fh)


_WEIGHTS = _load_weights()


def reference_rule_score(features: FeatureVector, attack_class: AttackClass) -> ClassScore:
    """Logistic score of a fixed linear model over the feature vector."""
    if attack_class is AttackClass.NONE:
        raise InvalidClass("reference rules score concrete attack classes only")
    spec = _WEIGHTS[attack_class.label]
    feats = features.to_dict()
    z = spec["bias"] + sum(w * feats[name] for name, w in spec["weights"].items())
    probability = 1.0 / (1.0 + math.exp(-z))
    active = [name for name in spec["weights"] if feats[name]]
    rationale = (
        f"rule features: {', '.join(active)}" if active else "no rule features triggered"
    )
    return ClassScore(attack_class, probability, rationale, f"rules:{attack_class.label}")


def _invoke_binding(binding: ClassifierBinding, payload: PayloadRecord) -> ClassScore:
    if binding.kind is BindingKind.REFERENCE_RULES:
        return reference_rule_score(extract_features(payload.normalized), binding.attack_class)
    try:
        resp = requests.post(
            binding.endpoint,
            json={"payload": payload.raw},
            timeout=binding.timeout_ms / 1000.0,
        )
        resp.raise_for_status()
        body = resp.json()
        probability = min(1.0, max(0.0, float(body["probability"])))
        return ClassScore(
            binding.attack_class,
            probability,
            str(body.get("rationale", "")),
            f"remote:{binding.attack_class.label}",
        )
    except Exception:
        return ClassScore(
            binding.attack_class, 0.0, "classifier_unavailable",
            f"remote:{binding.attack_class.label}",
        )


def classify_all(
    payload: PayloadRecord, bindings: list[ClassifierBinding]
) -> ClassificationTable:
    """Run every registered classifier and collect the comparison table.

    Scores come back in canonical class-code order regardless of binding
    registration order; individual classifier failures score 0.
    """
    if not bindings:
        raise ConfigError("at least one classifier binding is required")
    seen = set()
    for b in bindings:
        if b.attack_class in seen:
            raise ConfigError(f"duplicate binding for class {b.attack_class.label}")
        seen.add(b.attack_class)

    with ThreadPoolExecutor(max_workers=len(bindings)) as pool:
        scores = list(pool.map(lambda b: _invoke_binding(b, payload), bindings))
    scores.sort(key=lambda s: s.attack_class.code)
    return ClassificationTable(payload_id=payload.id, scores=scores)


def default_bindings() -> list[ClassifierBinding]:
    return [ClassifierBinding(cls) for cls in ATTACK_CLASSES]


def f_max(table: ClassificationTable) -> AttackClass:
    """Gated argmax over the comparison table.

    Returns the class with the highest probability when that maximum is at
    least 0.5, otherwise NONE. Ties break toward the lowest class code.
    """
    if not table.scores:
        raise EmptyTable("classification table has no scores")
    best = min(table.scores, key=lambda s: (-s.probability, s.attack_class.code))
    if best.probability >= 0.5:
        return best.attack_class
    return AttackClass.NONE
