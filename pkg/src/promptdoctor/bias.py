"""Bias detection (gender, race, sexuality) and the de-biasing loop.

Detection distinguishes explicit bias from bias-proneness: a prompt with no
biased wording can still be ambiguous enough to pull biased completions out
of a model. Repair runs a bounded generation-evaluation loop: rewrite,
re-detect, requeue the still-flawed, stop at five clean rewrites or ten
iterations.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass

from .errors import MalformedResponse
from .gateway import Gateway
from .metaprompts import BIAS_TYPES, MetaPromptBank
from .model import CanonicalPrompt, SourcePrompt, canonicalize, substitute
from .patcher import PatchSet

log = logging.getLogger(__name__)

MAX_ITERATIONS = 10
TARGET_CLEAN = 5
REWRITES_PER_ITERATION = 5


@dataclass(frozen=True)
class BiasFinding:
    prompt_id: str | None
    bias_type: str
    explicit: bool
    prone: bool
    reasoning: str
    evaluable: bool = True

    def __post_init__(self):
        if self.bias_type not in BIAS_TYPES:
            raise ValueError(f"unknown bias type {self.bias_type!r}")
        if (self.explicit or self.prone) and not self.reasoning:
            raise ValueError("a positive finding needs non-empty reasoning")

    @property
    def flagged(self) -> bool:
        return self.explicit or self.prone

    def to_dict(self) -> dict:
        return {
            "prompt_id": self.prompt_id,
            "bias_type": self.bias_type,
            "explicit": self.explicit,
            "prone": self.prone,
            "reasoning": self.reasoning,
            "evaluable": self.evaluable,
        }


@dataclass(frozen=True)
class RewriteCandidate:
    text: str
    holes: frozenset[str]
    distance: int  # iteration that produced it, >= 1
    status: str = "unevaluated"  # clean | flawed | unevaluated

    def __post_init__(self):
        if self.distance < 1:
            raise ValueError("distance starts at 1")
        if self.status not in ("clean", "flawed", "unevaluated"):
            raise ValueError(f"bad status {self.status!r}")

    def to_dict(self) -> dict:
        return {"text": self.text, "distance": self.distance}


@dataclass
class DebiasResult:
    candidates: list[RewriteCandidate]
    partial: bool
    iterations: int
    evaluations: int = 0
    discarded_hole_violations: int = 0

    def to_dict(self) -> dict:
        return {
            "rewrites": [c.to_dict() for c in self.candidates],
            "partial": self.partial,
            "iterations": self.iterations,
        }


def detect_bias(
    gateway: Gateway,
    bank: MetaPromptBank,
    cp: CanonicalPrompt,
    patch: PatchSet | None,
    bias_type: str,
) -> BiasFinding:
    """Run the multi-shot detector on the patched prompt at temperature 0."""
    if cp.holes:
        if patch is None or not patch.covers(cp):
            raise ValueError("patch must cover every hole of the prompt")
        shown = substitute(cp, patch.values)
    else:
        shown = cp.text  # zero-hole prompts are evaluated un-patched
    req = bank.bias_detection(bias_type).render(temperature=0.0, prompt=shown)
    schema = {
        f"{bias_type}_bias": "boolean",
        f"may_cause_{bias_type}_bias": "boolean",
        "reasoning": "string",
    }
    try:
        obj = gateway.chat_json("judge", req, schema)
    except MalformedResponse as exc:
        log.warning("bias detection unevaluable for %s: %s", cp.origin, exc)
        return BiasFinding(cp.origin, bias_type, False, False, "", evaluable=False)
    return BiasFinding(
        prompt_id=cp.origin,
        bias_type=bias_type,
        explicit=obj[f"{bias_type}_bias"],
        prone=obj[f"may_cause_{bias_type}_bias"],
        reasoning=obj["reasoning"],
    )


def _as_canonical(text: str) -> CanonicalPrompt:
    sp = SourcePrompt.create("<rewrite>", (0, max(1, len(text.encode("utf-8")))), text, "generic-template")
    return canonicalize(sp)


def _patch_for(cp: CanonicalPrompt, patch: PatchSet | None) -> PatchSet | None:
    """Reuse the original patch values for a rewrite with the same holes."""
    if not cp.holes:
        return None
    assert patch is not None
    return PatchSet(cp.origin, {name: patch.values[name] for name in cp.hole_names}, patch.mode)


def debias(
    gateway: Gateway,
    bank: MetaPromptBank,
    cp: CanonicalPrompt,
    finding: BiasFinding,
    patch: PatchSet | None = None,
) -> DebiasResult:
    """Generation-evaluation repair loop for a flagged prompt.

    FIFO over flawed prompts; each iteration asks for five rewrites,
    discards hole-set violators and already-seen texts, re-detects the
    rest. Ends with >= 5 clean candidates or after 10 iterations,
    returning clean candidates sorted by generation distance.
    """
    if not finding.flagged:
        raise ValueError("debias expects a finding with explicit or prone set")
    if cp.holes and (patch is None or not patch.covers(cp)):
        from .patcher import patch as generate_patch

        patch = generate_patch(gateway, bank, cp, "sequential")

    queue: deque[CanonicalPrompt] = deque([cp])
    seen: set[str] = {cp.text}
    clean: list[RewriteCandidate] = []
    iterations = 0
    evaluations = 0
    discarded = 0

    while queue and len(clean) < TARGET_CLEAN and iterations < MAX_ITERATIONS:
        iterations += 1
        flawed = queue.popleft()
        req = bank.bias_rewrite.render(
            bias=finding.bias_type,
            prompt=flawed.text,
            reasoning=finding.reasoning or "may elicit biased responses",
        )
        try:
            obj = gateway.chat_json("generator", req, {"prompts": "array-of-string"})
        except MalformedResponse:
            log.warning("rewrite generation failed at iteration %d", iterations)
            continue
        for text in obj["prompts"][:REWRITES_PER_ITERATION]:
            candidate = _as_canonical(text)
            if candidate.hole_set != cp.hole_set:
                discarded += 1
                continue
            if candidate.text in seen:
                continue
            seen.add(candidate.text)
            verdict = detect_bias(
                gateway, bank, candidate, _patch_for(candidate, patch), finding.bias_type
            )
            evaluations += 1
            if verdict.evaluable and not verdict.flagged:
                clean.append(
                    RewriteCandidate(
                        text=candidate.text,
                        holes=candidate.hole_set,
                        distance=iterations,
                        status="clean",
                    )
                )
            else:
                queue.append(candidate)

    clean.sort(key=lambda c: c.distance)  # stable: ties keep generation order
    return DebiasResult(
        candidates=clean,
        partial=len(clean) < TARGET_CLEAN,
        iterations=iterations,
        evaluations=evaluations,
        discarded_hole_violations=discarded,
    )
