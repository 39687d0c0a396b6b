"""Lexical and embedding-based quality metrics for generated reports.

Tokenization is whitespace splitting on lowercased text throughout. The
METEOR variant here uses exact unigram matches only (no stemming or synonym
tables); the embedding score is a whole-text cosine over the pluggable
embedder rather than token-level greedy matching.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

from ..errors import EmptyReferences
from ..knowledge import Embedder, cosine
from ..reporting import ReportDocument


@dataclass
class MetricReport:
    bleu: float
    rouge_l: float
    meteor_lite: float
    embed_score: float
    factual_consistency: float

    def to_dict(self) -> dict:
        return {
            "bleu": self.bleu,
            "rouge_l": self.rouge_l,
            "meteor_lite": self.meteor_lite,
            "embed_score": self.embed_score,
            "factual_consistency": self.factual_consistency,
        }


def _tokens(text: str) -> list[str]:
    return text.lower().split()


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: str, references: list[str], max_n: int = 4) -> float:
    """Corpus-of-one BLEU: geometric mean of modified n-gram precisions with
    the closest-reference brevity penalty. Any zero precision zeroes the
    score."""
    if not references:
        raise EmptyReferences("bleu needs at least one reference")
    cand = _tokens(candidate)
    if not cand:
        return 0.0
    refs = [_tokens(r) for r in references]

    upper = min(max_n, len(cand))
    log_sum = 0.0
    for n in range(1, upper + 1):
        cand_ngrams = _ngrams(cand, n)
        total = sum(cand_ngrams.values())
        clipped = 0
        for gram, count in cand_ngrams.items():
            clipped += min(count, max(_ngrams(r, n).get(gram, 0) for r in refs))
        if clipped == 0 or total == 0:
            return 0.0
        log_sum += math.log(clipped / total)
    precision_mean = math.exp(log_sum / upper)

    c = len(cand)
    r = min((len(ref) for ref in refs), key=lambda L: (abs(L - c), L))
    bp = math.exp(1.0 - r / c) if c < r else 1.0
    return bp * precision_mean


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            cur[j] = prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> float:
    cand, ref = _tokens(candidate), _tokens(reference)
    lcs = _lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    p = lcs / len(cand)
    r = lcs / len(ref)
    return 2 * p * r / (p + r)


def _align(cand: list[str], ref: list[str]) -> list[tuple[int, int]]:
    # Greedy alignment: each candidate token takes the reference position
    # that extends the previous contiguous run if possible, else the leftmost
    # unused occurrence.
    positions: dict[str, list[int]] = {}
    for i, tok in enumerate(ref):
        positions.setdefault(tok, []).append(i)
    used: set[int] = set()
    pairs: list[tuple[int, int]] = []
    prev_ref = None
    for ci, tok in enumerate(cand):
        candidates = [i for i in positions.get(tok, []) if i not in used]
        if not candidates:
            continue
        if prev_ref is not None and prev_ref + 1 in candidates:
            ri = prev_ref + 1
        else:
            ri = candidates[0]
        used.add(ri)
        pairs.append((ci, ri))
        prev_ref = ri
    return pairs


def meteor_lite(candidate: str, reference: str) -> float:
    """Exact-match METEOR variant: harmonic F-mean (recall-weighted 9:1) times
    a fragmentation penalty of 0.5 * (chunks / matches)^3."""
    cand, ref = _tokens(candidate), _tokens(reference)
    pairs = _align(cand, ref)
    m = len(pairs)
    if m == 0:
        return 0.0
    p = m / len(cand)
    r = m / len(ref)
    f_mean = 10 * p * r / (r + 9 * p)
    chunks = 1
    for (pc, pr), (cc, cr) in zip(pairs, pairs[1:]):
        if cc != pc + 1 or cr != pr + 1:
            chunks += 1
    penalty = 0.5 * (chunks / m) ** 3
    return f_mean * (1.0 - penalty)


def embed_score(candidate: str, reference: str, embedder: Embedder) -> float:
    """Whole-text embedding cosine between candidate and reference."""
    vecs = embedder.embed([candidate, reference])
    return cosine(vecs[0], vecs[1])


_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")


def factual_consistency(
    report: ReportDocument,
    evidence: list,
    embedder: Embedder,
    tau: float = 0.5,
) -> float:
    """Fraction of report sentences supported by at least one evidence chunk.

    A sentence counts as supported when its max cosine against any chunk
    embedding reaches ``tau``. Analytical summary findings and the conclusion
    are scored; empty evidence scores 0 by definition.
    """
    if not evidence:
        return 0.0
    sections = report.sections
    text_blocks = list(sections.get("analytical_summary", []))
    conclusion = sections.get("conclusion", "")
    sentences: list[str] = []
    for block in text_blocks:
        sentences += [s.strip() for s in _SENTENCE_RE.split(block) if s.strip()]
    sentences += [s.strip() for s in _SENTENCE_RE.split(conclusion) if s.strip()]
    if not sentences:
        return 0.0
    chunk_texts = [getattr(ch, "text", ch) for ch in evidence]
    chunk_vecs = embedder.embed(chunk_texts)
    sentence_vecs = embedder.embed(sentences)
    supported = 0
    for sv in sentence_vecs:
        best = max(cosine(sv, cv) for cv in chunk_vecs)
        if best >= tau:
            supported += 1
    return supported / len(sentences)
