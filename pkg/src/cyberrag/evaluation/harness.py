"""Dataset handling, the ablation runner, and the robustness protocol."""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import EmptyResults
from ..knowledge import Embedder
from ..orchestrator import Orchestrator, OrchestratorConfig
from ..payload import AttackClass, PayloadRecord
from ..reporting import build_attack_representation, render_report
from .judge import judge
from .metrics import MetricReport, bleu, embed_score, factual_consistency, meteor_lite, rouge_l

VALID_TAGS = ("clean", "adversarial", "ood")


@dataclass
class LabeledPayload:
    payload: str
    label: AttackClass
    tag: str = "clean"
    origin: str | None = None

    def __post_init__(self):
        if self.tag not in VALID_TAGS:
            raise ValueError(f"unknown tag {self.tag!r}")


def load_dataset(path: str | Path) -> list[LabeledPayload]:
    """Read a JSON Lines dataset: {"payload", "label": 0-3, "tag", "origin"?}."""
    items = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        items.append(
            LabeledPayload(
                payload=obj["payload"],
                label=AttackClass.from_code(obj["label"]),
                tag=obj.get("tag", "clean"),
                origin=obj.get("origin"),
            )
        )
    return items


def correct_classification_pct(
    results: list[tuple[AttackClass, LabeledPayload]],
) -> float:
    """Percentage of correct predictions.

    Clean and adversarial items are correct when the predicted class equals
    the true label; OOD items are correct when the pipeline abstains (NONE).
    """
    if not results:
        raise EmptyResults("no results to score")
    correct = 0
    for predicted, truth in results:
        if truth.tag == "ood":
            correct += predicted is AttackClass.NONE
        else:
            correct += predicted is truth.label
    return 100.0 * correct / len(results)


@dataclass
class ArmResult:
    metrics: MetricReport
    judge_overall: float | None = None
    per_item: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "metrics": self.metrics.to_dict(),
            "judge_overall": self.judge_overall,
            "per_item": self.per_item,
        }


@dataclass
class AblationReport:
    with_rag: ArmResult
    without_rag: ArmResult
    failed_items: list[dict] = field(default_factory=list)

    def deltas(self) -> dict:
        w, wo = self.with_rag.metrics.to_dict(), self.without_rag.metrics.to_dict()
        return {name: w[name] - wo[name] for name in w}

    def to_dict(self) -> dict:
        return {
            "with_rag": self.with_rag.to_dict(),
            "without_rag": self.without_rag.to_dict(),
            "deltas": self.deltas(),
            "failed_items": self.failed_items,
        }


def _evaluate_arm(
    items: list[tuple[int, LabeledPayload, str]],
    orchestrator: Orchestrator,
    embedder: Embedder,
    config: OrchestratorConfig,
    use_retrieval: bool,
    judge_endpoint,
    failures: list[dict],
) -> ArmResult:
    per_item = []
    for index, item, reference in items:
        try:
            record = PayloadRecord.create(f"abl-{index}", item.payload)
            verdict = orchestrator.analyze(record, config, use_retrieval=use_retrieval)
            rep = build_attack_representation(verdict, record)
            doc, rendered = render_report(rep, alert_id=record.id, mode="markdown")
            chunks = [sc.chunk for sc in verdict.evidence]
            scores = {
                "index": index,
                "bleu": bleu(rendered, [reference]),
                "rouge_l": rouge_l(rendered, reference),
                "meteor_lite": meteor_lite(rendered, reference),
                "embed_score": embed_score(rendered, reference, embedder),
                "factual_consistency": factual_consistency(doc, chunks, embedder),
            }
            if judge_endpoint is not None:
                scores["judge_overall"] = judge(
                    rendered, item.payload, item.label, judge_endpoint
                ).overall
            per_item.append(scores)
        except Exception as exc:  # recorded, not fatal
            failures.append({"index": index, "arm": "with_rag" if use_retrieval else "without_rag", "error": str(exc)})

    per_item.sort(key=lambda s: s["index"])

    def mean(name: str) -> float:
        values = [s[name] for s in per_item]
        return statistics.fmean(values) if values else 0.0

    metrics = MetricReport(
        bleu=mean("bleu"),
        rouge_l=mean("rouge_l"),
        meteor_lite=mean("meteor_lite"),
        embed_score=mean("embed_score"),
        factual_consistency=mean("factual_consistency"),
    )
    judge_mean = None
    if judge_endpoint is not None and per_item:
        judge_mean = statistics.fmean(s["judge_overall"] for s in per_item)
    return ArmResult(metrics=metrics, judge_overall=judge_mean, per_item=per_item)


def run_ablation(
    dataset: list[LabeledPayload],
    reference_reports: dict[str, str],
    orchestrator: Orchestrator,
    embedder: Embedder,
    config: OrchestratorConfig | None = None,
    judge_endpoint=None,
) -> AblationReport:
    """Run the pipeline twice per payload (retrieval on/off) and score both arms."""
    config = config or OrchestratorConfig()
    items = [
        (i, item, reference_reports[item.payload])
        for i, item in enumerate(dataset)
        if item.payload in reference_reports
    ]
    failures: list[dict] = []
    with_rag = _evaluate_arm(items, orchestrator, embedder, config, True, judge_endpoint, failures)
    without_rag = _evaluate_arm(items, orchestrator, embedder, config, False, judge_endpoint, failures)
    return AblationReport(with_rag=with_rag, without_rag=without_rag, failed_items=failures)


def run_robustness(
    dataset: list[LabeledPayload],
    orchestrator: Orchestrator,
    config: OrchestratorConfig | None = None,
) -> dict:
    """Classify every item and report Correct Classification (%) per tag."""
    config = config or OrchestratorConfig()
    results: list[tuple[AttackClass, LabeledPayload]] = []
    for i, item in enumerate(dataset):
        record = PayloadRecord.create(f"rob-{i}", item.payload)
        verdict = orchestrator.analyze(record, config)
        results.append((verdict.final_class, item))
    by_tag: dict[str, list] = {}
    for pair in results:
        by_tag.setdefault(pair[1].tag, []).append(pair)
    return {
        "overall_pct": correct_classification_pct(results),
        "per_tag_pct": {tag: correct_classification_pct(rs) for tag, rs in by_tag.items()},
        "results": results,
    }
