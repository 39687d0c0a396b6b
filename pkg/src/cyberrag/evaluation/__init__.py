from .metrics import (
    MetricReport,
    bleu,
    embed_score,
    factual_consistency,
    meteor_lite,
    rouge_l,
)
from .judge import JudgeScores, judge
from .perturb import PERTURB_OPS, perturb
from .harness import (
    AblationReport,
    LabeledPayload,
    correct_classification_pct,
    load_dataset,
    run_ablation,
    run_robustness,
)

__all__ = [
    "AblationReport",
    "JudgeScores",
    "LabeledPayload",
    "MetricReport",
    "PERTURB_OPS",
    "bleu",
    "correct_classification_pct",
    "embed_score",
    "factual_consistency",
    "judge",
    "load_dataset",
    "meteor_lite",
    "perturb",
    "rouge_l",
    "run_ablation",
    "run_robustness",
]
