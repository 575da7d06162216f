"""Corpus ingestion, cleaning, stratified sampling, task categorization.

Cleaning drops prompts of 31 characters or less and prompts containing
characters outside ASCII and the emoji blocks listed below. Sampling
buckets prompts by hole count {0..5, 6+} and draws a finite-population
corrected Cochran sample per stratum.

Emoji blocks accepted by the non-English filter:

======================================  =================
Block                                   Range
======================================  =================
Miscellaneous Symbols and Pictographs   U+1F300..U+1F5FF
Emoticons                               U+1F600..U+1F64F
Transport and Map Symbols               U+1F680..U+1F6FF
Supplemental Symbols and Pictographs    U+1F900..U+1F9FF
======================================  =================
"""

from __future__ import annotations

import json
import math
import random
import re
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from statistics import NormalDist
from typing import Iterable, Sequence

from .errors import InsufficientStratumWarning
from .model import CanonicalPrompt, PromptRecord

MIN_PROMPT_LENGTH = 32  # strictly shorter prompts (<= 31 chars) are dropped

EMOJI_BLOCKS = (
    (0x1F300, 0x1F5FF),
    (0x1F600, 0x1F64F),
    (0x1F680, 0x1F6FF),
    (0x1F900, 0x1F9FF),
)

HOLE_BUCKETS = ("0", "1", "2", "3", "4", "5", "6+")


class TaskCategory(str, Enum):
    QA = "qa"
    GRAMMAR_CORRECTION = "grammar_correction"
    SUMMARIZATION = "summarization"
    TRANSLATION = "translation"
    UNCATEGORIZED = "uncategorized"


@dataclass
class CorpusStats:
    total: int = 0
    removed_short: int = 0
    removed_non_english: int = 0
    strata: dict[str, int] = field(default_factory=lambda: {b: 0 for b in HOLE_BUCKETS})

    @property
    def retained(self) -> int:
        return self.total - self.removed_short - self.removed_non_english

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "removed_short": self.removed_short,
            "removed_non_english": self.removed_non_english,
            "retained": self.retained,
            "strata": dict(self.strata),
        }


def hole_bucket(n_holes: int) -> str:
    return str(n_holes) if n_holes <= 5 else "6+"


def _is_allowed_char(ch: str) -> bool:
    cp = ord(ch)
    if cp < 128:
        return True
    return any(lo <= cp <= hi for lo, hi in EMOJI_BLOCKS)


def is_english_like(text: str) -> bool:
    return all(_is_allowed_char(c) for c in text)


def clean(corpus: Sequence[CanonicalPrompt]) -> tuple[list[CanonicalPrompt], CorpusStats]:
    """Drop short and non-English prompts; account for every removal."""
    stats = CorpusStats(total=len(corpus))
    kept: list[CanonicalPrompt] = []
    for cp in corpus:
        if len(cp.text) < MIN_PROMPT_LENGTH:
            stats.removed_short += 1
            continue
        if not is_english_like(cp.text):
            stats.removed_non_english += 1
            continue
        kept.append(cp)
        stats.strata[hole_bucket(len(cp.holes))] += 1
    return kept, stats


# ---------------------------------------------------------------------------
# Stratified sampling
# ---------------------------------------------------------------------------


def cochran_sample_size(population: int, confidence: float, error: float) -> int:
    """Finite-population corrected Cochran sample size with p = q = 0.5."""
    if not 0 < error < 1:
        raise ValueError("error must be in (0, 1)")
    if not 0 < confidence < 1:
        raise ValueError("confidence must be in (0, 1)")
    z = NormalDist().inv_cdf(1 - (1 - confidence) / 2)
    if z <= 1:
        raise ValueError("confidence too low: implied z must exceed 1")
    pq = 0.25
    n = (z * z * pq) / (error * error + (z * z * pq) / population)
    return math.ceil(n)


def stratified_sample(
    corpus: Sequence[CanonicalPrompt],
    confidence: float,
    error: float,
    seed: int,
) -> list[CanonicalPrompt]:
    """Sample per hole-count stratum; deterministic for a given seed.

    Strata are visited in fixed bucket order and drawn sequentially from one
    seeded generator, so the output is byte-identical across runs.
    """
    if not corpus:
        raise ValueError("corpus must be non-empty")
    buckets: dict[str, list[CanonicalPrompt]] = {b: [] for b in HOLE_BUCKETS}
    for cp in corpus:
        buckets[hole_bucket(len(cp.holes))].append(cp)

    rng = random.Random(seed)
    out: list[CanonicalPrompt] = []
    for bucket in HOLE_BUCKETS:
        members = buckets[bucket]
        if len(members) < 1:
            warnings.warn(
                f"stratum {bucket!r} is empty and was skipped",
                InsufficientStratumWarning,
            )
            continue
        n = cochran_sample_size(len(members), confidence, error)
        indices = sorted(rng.sample(range(len(members)), n))
        out.extend(members[i] for i in indices)
    return out


# ---------------------------------------------------------------------------
# Task categorization
# ---------------------------------------------------------------------------

GRAMMAR_KEYWORDS = ("grammar", "punctuation", "typo", "spelling", "proofread", "correct the")
TRANSLATION_KEYWORDS = ("translate", "translation")
SUMMARIZATION_KEYWORDS = ("summarize", "summarise", "summary", "summarization", "tl;dr")

EMBEDDING_SIMILARITY_THRESHOLD = 0.80

CATEGORY_EXEMPLARS = {
    TaskCategory.GRAMMAR_CORRECTION: (
        "Correct the grammar and spelling mistakes in the following text.",
        "Fix punctuation and typos in this sentence without changing its meaning.",
    ),
    TaskCategory.TRANSLATION: (
        "Translate the following text to Spanish.",
        "Provide an English translation of this passage.",
    ),
    TaskCategory.SUMMARIZATION: (
        "Summarize the following document in three sentences.",
        "Write a short summary of this article.",
    ),
}

WH_WORDS = ("who", "what", "when", "where", "why", "how", "which", "whose", "whom")
AUXILIARIES = ("is", "are", "can", "do", "does", "did", "will", "would", "could", "should", "was", "were")

# Base-form verbs that commonly open an instruction.
IMPERATIVE_VERBS = frozenset(
    """
    act add address adjust advise analyze annotate answer apply argue arrange
    ask assemble assess assign assume avoid be begin brainstorm break build
    calculate call categorize change chat check choose cite clarify classify
    clean collect combine comment compare complete compose compute condense
    consider construct continue convert copy correct count cover craft create
    critique debug decide decode define deliver demonstrate describe design
    detail detect determine develop devise diagnose differentiate discuss
    display divide draft draw edit elaborate eliminate emphasize ensure
    enumerate establish estimate evaluate examine expand explain explore
    express extract figure fill filter find finish fix focus follow form
    format formulate gather generate give go group guess guide help highlight
    identify illustrate imagine implement improve include incorporate indicate
    infer insert inspect integrate interpret introduce investigate invent join
    judge justify keep label list locate look make map mark match measure
    mention merge modify name note number offer order organize outline output
    paraphrase parse perform pick plan play populate predict prepare present
    pretend print prioritize produce proofread propose provide put rank rate
    read recommend record reduce refactor refine reformat remove rename
    reorder repeat rephrase replace reply report represent respond restate
    restructure retrieve return review revise reword rewrite roleplay run say
    search select send separate set share show simplify simulate solve sort
    speak specify split start state stop structure suggest summarize
    summarise suppose take talk tell test think trace transform translate
    turn update use validate verify write
    """.split()
)


def _first_token(text: str) -> str:
    m = re.search(r"[A-Za-z']+", text)
    return m.group(0).lower() if m else ""


def detect_mood(text: str) -> str:
    """Rough mood call: 'interrogative', 'imperative', or 'other'."""
    stripped = text.strip()
    first = _first_token(stripped)
    if "?" in stripped or first in WH_WORDS or first in AUXILIARIES:
        return "interrogative"
    if first in IMPERATIVE_VERBS:
        return "imperative"
    return "other"


def _keyword_category(lowered: str) -> TaskCategory | None:
    if any(k in lowered for k in GRAMMAR_KEYWORDS):
        return TaskCategory.GRAMMAR_CORRECTION
    if any(k in lowered for k in TRANSLATION_KEYWORDS):
        return TaskCategory.TRANSLATION
    if any(k in lowered for k in SUMMARIZATION_KEYWORDS):
        return TaskCategory.SUMMARIZATION
    return None


def categorize(p: CanonicalPrompt, gateway=None) -> TaskCategory:
    """Assign exactly one task category; never raises.

    With a gateway, prompts missing the keyword lists are compared to per
    category exemplars by embedding cosine similarity; embedding failures
    silently degrade to keyword-only mode.
    """
    lowered = p.text.lower()
    cat = _keyword_category(lowered)
    if cat is not None:
        return cat
    if gateway is not None:
        try:
            cat = _embedding_category(p.text, gateway)
            if cat is not None:
                return cat
        except Exception:
            pass
    if 20 <= len(p.text) <= 200 and detect_mood(p.text) in ("imperative", "interrogative"):
        return TaskCategory.QA
    return TaskCategory.UNCATEGORIZED


def _embedding_category(text: str, gateway) -> TaskCategory | None:
    from .metrics import cosine  # local import to avoid a cycle

    exemplars: list[tuple[TaskCategory, str]] = []
    for cat, texts in CATEGORY_EXEMPLARS.items():
        exemplars.extend((cat, t) for t in texts)
    vectors = gateway.embed([text] + [t for _, t in exemplars])
    target, rest = vectors[0], vectors[1:]
    best: tuple[float, TaskCategory] | None = None
    for (cat, _), vec in zip(exemplars, rest):
        score = cosine(target, vec).value
        if best is None or score > best[0]:
            best = (score, cat)
    if best is not None and best[0] >= EMBEDDING_SIMILARITY_THRESHOLD:
        return best[1]
    return None


# ---------------------------------------------------------------------------
# Corpus file IO
# ---------------------------------------------------------------------------


def load_records(path: str | Path) -> list[PromptRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(PromptRecord.from_dict(json.loads(line)))
    return records


def save_records(records: Iterable[PromptRecord], path: str | Path):
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec.to_dict(), ensure_ascii=False) + "\n")
