"""Deterministic text-similarity scorers: sentence BLEU, GLEU, cosine.

Tokenizer: lowercase the text, then emit maximal runs of word characters
and each remaining non-space character as its own token ("The cat sat." ->
["the", "cat", "sat", "."]). This is fully specified here so scores are
reproducible across implementations.

BLEU is sentence-level BLEU-4 with clipped n-gram precisions, add-one
smoothing on orders 2..4, a hard zero when the unigram precision is zero,
and the usual brevity penalty. GLEU is the Google-GLEU formulation:
min(precision, recall) over the union of 1..4-gram matches.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import ZeroVector

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")

MAX_NGRAM_ORDER = 4


@dataclass(frozen=True)
class Score:
    value: float
    metric: str
    note: str | None = None
    raw: float | None = None  # pre-clamp value, when clamping applied

    def __post_init__(self):
        if math.isnan(self.value):
            raise ValueError("scores must never be NaN")
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"score {self.value} outside [0, 1]")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: str, reference: str) -> Score:
    """Sentence-level BLEU-4 of candidate against one reference."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return Score(0.0, "bleu", note="empty-input")

    log_precisions = []
    for n in range(1, MAX_NGRAM_ORDER + 1):
        cand_counts = _ngrams(cand, n)
        ref_counts = _ngrams(ref, n)
        clipped = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
        total = sum(cand_counts.values())
        if n == 1:
            if clipped == 0:
                return Score(0.0, "bleu")
            p = clipped / total
        else:
            p = (clipped + 1) / (total + 1)
        log_precisions.append(math.log(p))

    brevity = 1.0 if len(cand) >= len(ref) else math.exp(1 - len(ref) / len(cand))
    value = brevity * math.exp(sum(log_precisions) / MAX_NGRAM_ORDER)
    return Score(min(1.0, value), "bleu")


def gleu(candidate: str, reference: str) -> Score:
    """Sentence GLEU: min(precision, recall) over pooled 1..4-grams."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return Score(0.0, "gleu", note="empty-input")

    matches = 0
    cand_total = 0
    ref_total = 0
    for n in range(1, MAX_NGRAM_ORDER + 1):
        cand_counts = _ngrams(cand, n)
        ref_counts = _ngrams(ref, n)
        matches += sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
        cand_total += sum(cand_counts.values())
        ref_total += sum(ref_counts.values())

    precision = matches / cand_total if cand_total else 0.0
    recall = matches / ref_total if ref_total else 0.0
    return Score(min(precision, recall), "gleu")


def cosine(a: Sequence[float], b: Sequence[float]) -> Score:
    """Cosine similarity, clamped to [0, 1] for scoring.

    The raw (possibly negative) value is kept on ``Score.raw``.
    """
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    dot = sum(x * y for x, y in zip(a, b))
    norm_a = math.sqrt(sum(x * x for x in a))
    norm_b = math.sqrt(sum(y * y for y in b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroVector("cosine of a zero-norm vector is undefined")
    raw = dot / (norm_a * norm_b)
    return Score(min(1.0, max(0.0, raw)), "cosine", raw=raw)
