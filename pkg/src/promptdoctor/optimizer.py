"""Seed generation, task-based scoring, and the optimization loop.

Every prompt is assumed sub-optimal until measured. The loop seeds itself
with principle-guided rewrites, scores everything on a synthetic training
set, then repeatedly feeds the top scorers (worst to best) back to the
generator asking for better candidates. It stops when the best training
score stalls, then re-scores source and best on the held-out test split:
a candidate that wins on train but not on test is a degraded run, exactly
the trap the test split exists to catch.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass

from .corpus import TaskCategory
from .errors import (
    BudgetExceeded,
    EvaluationFailed,
    MalformedResponse,
    SeedShortfall,
    TransportError,
)
from .gateway import ChatRequest, Gateway
from .metaprompts import MetaPromptBank
from .metrics import Score, bleu, cosine, gleu
from .model import CanonicalPrompt, SourcePrompt, canonicalize, substitute
from .patcher import SyntheticDataset
from .principles import PRINCIPLES

log = logging.getLogger(__name__)

MAX_SEED_TRIES = 3
PRINCIPLES_PER_REQUEST = 5
MAX_ROW_FAILURE_RATE = 0.20


@dataclass(frozen=True)
class Hyperparams:
    n_seeds: int = 16
    prompts_per_step: int = 20
    train_count: int = 30
    test_count: int = 10
    top_n: int = 8
    epsilon: float = 1e-6
    patience: int = 1
    step_cap: int = 10

    def to_dict(self) -> dict:
        return {
            "n_seeds": self.n_seeds,
            "prompts_per_step": self.prompts_per_step,
            "train_count": self.train_count,
            "test_count": self.test_count,
            "top_n": self.top_n,
            "epsilon": self.epsilon,
            "patience": self.patience,
            "step_cap": self.step_cap,
        }


@dataclass(frozen=True)
class ScoredPrompt:
    prompt: CanonicalPrompt
    train_score: Score
    step: int  # 0 = source or seed

    def to_dict(self) -> dict:
        return {"text": self.prompt.text, "score": self.train_score.value, "step": self.step}


@dataclass(frozen=True)
class StepRecord:
    step: int
    candidates: tuple[ScoredPrompt, ...]
    best_so_far: float

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "candidates": [c.to_dict() for c in self.candidates],
            "best_so_far": self.best_so_far,
        }


@dataclass
class OptimizationRun:
    source: CanonicalPrompt
    category: TaskCategory
    steps: list[StepRecord]
    best: ScoredPrompt
    test_scores: dict[str, float | None]
    verdict: str  # improved | degraded | unchanged
    hyperparams: Hyperparams
    seed: int
    partial: bool = False
    judge_template: str | None = None

    def to_dict(self) -> dict:
        return {
            "source": self.source.text,
            "category": self.category.value,
            "steps": [s.to_dict() for s in self.steps],
            "best": self.best.to_dict(),
            "test_scores": dict(self.test_scores),
            "verdict": self.verdict,
            "hyperparams": self.hyperparams.to_dict(),
            "seed": self.seed,
            "partial": self.partial,
            "judge_template": self.judge_template,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False, indent=2)


def _as_canonical(text: str) -> CanonicalPrompt:
    sp = SourcePrompt.create("<candidate>", (0, max(1, len(text.encode("utf-8")))), text, "generic-template")
    return canonicalize(sp)


def format_principles(picks) -> str:
    return "\n".join(f"{p.index}. {p.text}" for p in picks)


def generate_seeds(
    gateway: Gateway,
    bank: MetaPromptBank,
    source: CanonicalPrompt,
    n: int,
    seed: int,
) -> list[CanonicalPrompt]:
    """n principle-guided rewrites of the source, hole set preserved.

    Each request samples five distinct principles from the bank and cycles
    the temperature ladder. Raises SeedShortfall when fewer than
    max(1, n/2) valid seeds survive.
    """
    if n < 1:
        raise ValueError("need at least one seed")
    rng = random.Random(seed)
    ladder = gateway.config.temperature_ladder
    seeds: list[CanonicalPrompt] = []
    for i in range(n):
        picks = rng.sample(PRINCIPLES, PRINCIPLES_PER_REQUEST)
        req = bank.seed_generation.render(
            temperature=ladder[i % len(ladder)],
            prompt=source.text,
            principles=format_principles(picks),
        )
        for _ in range(MAX_SEED_TRIES):
            try:
                obj = gateway.chat_json("generator", req, {"prompt": "string"})
            except MalformedResponse:
                continue
            candidate = _as_canonical(obj["prompt"])
            if candidate.hole_set == source.hole_set:
                seeds.append(candidate)
                break
            log.debug("seed %d dropped a rewrite with the wrong hole set", i)
    if len(seeds) < max(1, n / 2):
        raise SeedShortfall(f"only {len(seeds)} of {n} seed rewrites were valid")
    return seeds


def make_judge_prompt(gateway: Gateway, bank: MetaPromptBank, source: CanonicalPrompt) -> CanonicalPrompt:
    """Generate the yes/no judge template for a QA prompt.

    The template must contain exactly one ``{text}`` hole; one corrective
    regeneration is attempted before giving up.
    """
    req = bank.judge_generator.render(prompt=source.text)
    for attempt in range(2):
        obj = gateway.chat_json("generator", req, {"judge_prompt": "string"})
        template = _as_canonical(obj["judge_prompt"])
        if template.hole_names == ("text",):
            return template
        req = req.with_turns(
            ("assistant", obj["judge_prompt"]),
            ("user", "The question must contain the placeholder {text} exactly once. Try again."),
        )
    raise MalformedResponse("judge template lacks a single {text} hole", raw=obj["judge_prompt"])


def _score_reply(
    gateway: Gateway,
    category: TaskCategory,
    reply: str,
    reference: str | None,
    judge_template: CanonicalPrompt | None,
) -> float:
    if category == TaskCategory.TRANSLATION:
        return bleu(reply, reference or "").value
    if category == TaskCategory.GRAMMAR_CORRECTION:
        return gleu(reply, reference or "").value
    if category == TaskCategory.SUMMARIZATION:
        vec_reply, vec_ref = gateway.embed([reply, reference or ""])
        return cosine(vec_reply, vec_ref).value
    # qa: binary LLM-as-judge verdict
    if judge_template is None:
        raise ValueError("qa scoring requires a judge template")
    rendered = substitute(judge_template, {"text": reply})
    verdict = gateway.chat("judge", ChatRequest.of(("user", rendered))).content
    return 1.0 if verdict.strip().lower().startswith("yes") else 0.0


_METRIC_BY_CATEGORY = {
    TaskCategory.TRANSLATION: "bleu",
    TaskCategory.GRAMMAR_CORRECTION: "gleu",
    TaskCategory.SUMMARIZATION: "cosine",
    TaskCategory.QA: "judge",
    TaskCategory.UNCATEGORIZED: "judge",
}


def evaluate(
    gateway: Gateway,
    p: CanonicalPrompt,
    dataset: SyntheticDataset,
    category: TaskCategory,
    judge_template: CanonicalPrompt | None = None,
) -> Score:
    """Mean per-row score of a prompt over a synthetic dataset.

    Rows that fail in transport are excluded when they stay under 20% of
    the dataset; beyond that the evaluation itself fails.
    """
    row_scores: list[float] = []
    failures = 0
    for row in dataset.rows:
        missing = [h for h in p.hole_names if h not in row.values]
        if missing:
            raise ValueError(f"dataset row does not cover holes {missing}")
        rendered = substitute(p, {h: row.values[h] for h in p.hole_names})
        try:
            reply = gateway.chat("responder", ChatRequest.of(("user", rendered))).content
            row_scores.append(_score_reply(gateway, category, reply, row.reference, judge_template))
        except TransportError:
            failures += 1
    if failures > MAX_ROW_FAILURE_RATE * dataset.K or not row_scores:
        raise EvaluationFailed(f"{failures}/{dataset.K} rows failed to score")
    mean = sum(row_scores) / len(row_scores)
    return Score(mean, _METRIC_BY_CATEGORY[category])


def _scored_block(candidates: list[ScoredPrompt]) -> str:
    lines = []
    for sp in candidates:
        lines.append(f"score={sp.train_score.value:.6f}\nprompt: {sp.prompt.text}")
    return "\n\n".join(lines)


def optimize(
    gateway: Gateway,
    bank: MetaPromptBank,
    source: CanonicalPrompt,
    category: TaskCategory,
    train: SyntheticDataset,
    test: SyntheticDataset,
    hyperparams: Hyperparams | None = None,
    seed: int = 0,
    judge_template: CanonicalPrompt | None = None,
) -> OptimizationRun:
    """Run the full self-improving optimization loop.

    Every candidate is scored once (cached by text). Best-so-far is a
    running max, so it is non-decreasing by construction; the recorded
    step trail makes that checkable from the serialized artifact.
    """
    hp = hyperparams or Hyperparams()
    if category in (TaskCategory.QA, TaskCategory.UNCATEGORIZED) and judge_template is None:
        judge_template = make_judge_prompt(gateway, bank, source)

    cache: dict[str, float] = {}
    partial = False

    def score_of(cp: CanonicalPrompt) -> float:
        if cp.text not in cache:
            cache[cp.text] = evaluate(gateway, cp, train, category, judge_template).value
        return cache[cp.text]

    steps: list[StepRecord] = []
    all_scored: list[ScoredPrompt] = []
    seen_texts = {source.text}

    def record_step(step_no: int, scored: list[ScoredPrompt]):
        all_scored.extend(scored)
        best = max(sp.train_score.value for sp in all_scored)
        steps.append(StepRecord(step_no, tuple(scored), best))

    try:
        seeds = generate_seeds(gateway, bank, source, hp.n_seeds, seed)
        step0 = [ScoredPrompt(source, Score(score_of(source), _METRIC_BY_CATEGORY[category]), 0)]
        for s in seeds:
            if s.text in seen_texts:
                continue
            seen_texts.add(s.text)
            step0.append(ScoredPrompt(s, Score(score_of(s), _METRIC_BY_CATEGORY[category]), 0))
        record_step(0, step0)

        stale = 0
        for step_no in range(1, hp.step_cap + 1):
            prev_best = steps[-1].best_so_far
            top = sorted(all_scored, key=lambda sp: sp.train_score.value)[-min(hp.top_n, len(all_scored)):]
            req = bank.optimizer_step.render(
                scored_prompts=_scored_block(top),
                count=str(hp.prompts_per_step),
            )
            try:
                obj = gateway.chat_json("generator", req, {"prompts": "array-of-string"})
            except MalformedResponse:
                log.warning("candidate generation failed at step %d", step_no)
                break
            scored_now: list[ScoredPrompt] = []
            for text in obj["prompts"][: hp.prompts_per_step]:
                candidate = _as_canonical(text)
                if candidate.hole_set != source.hole_set:
                    continue
                if candidate.text in seen_texts:
                    continue
                seen_texts.add(candidate.text)
                value = score_of(candidate)
                scored_now.append(
                    ScoredPrompt(candidate, Score(value, _METRIC_BY_CATEGORY[category]), step_no)
                )
            record_step(step_no, scored_now)
            if steps[-1].best_so_far - prev_best > hp.epsilon:
                stale = 0
            else:
                stale += 1
            if stale >= hp.patience:
                break
    except BudgetExceeded:
        log.warning("budget exhausted mid-optimization; returning partial run")
        partial = True
        if not steps:
            raise

    best_sp = max(all_scored, key=lambda sp: sp.train_score.value)
    test_scores: dict[str, float | None] = {"source": None, "best": None}
    verdict = "unchanged"
    if not partial:
        test_source = evaluate(gateway, source, test, category, judge_template).value
        test_best = (
            test_source
            if best_sp.prompt.text == source.text
            else evaluate(gateway, best_sp.prompt, test, category, judge_template).value
        )
        test_scores = {"source": test_source, "best": test_best}
        source_train = cache[source.text]
        if test_best > test_source:
            verdict = "improved"
        elif best_sp.train_score.value > source_train:
            verdict = "degraded"

    return OptimizationRun(
        source=source,
        category=category,
        steps=steps,
        best=best_sp,
        test_scores=test_scores,
        verdict=verdict,
        hyperparams=hp,
        seed=seed,
        partial=partial,
        judge_template=judge_template.text if judge_template else None,
    )
