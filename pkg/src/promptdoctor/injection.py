"""Per-hole injection testing against an attack corpus, plus hardening.

Every (hole, attack) pair is an independent trial: the attack payload goes
into that hole, generated mock values fill the rest, and the reply is
scanned for the attack's unique target marker (case-insensitive substring).
Trials run in parallel under the gateway's concurrency cap; the report is
a pure aggregate, so completion order cannot change it.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from .errors import BudgetExceeded, Exhausted, MalformedResponse, TransportError
from .gateway import ChatRequest, Gateway
from .metaprompts import MetaPromptBank
from .model import CanonicalPrompt, SourcePrompt, canonicalize, substitute

log = logging.getLogger(__name__)

MIN_TARGET_LENGTH = 12
MAX_ITERATIONS = 10
REWRITES_PER_ITERATION = 5

BUNDLED_ATTACKS = "attacks.jsonl"


@dataclass(frozen=True)
class AttackCase:
    id: str
    payload: str
    target: str  # un-common marker; present in a reply == attack succeeded
    description: str = ""

    def __post_init__(self):
        if len(self.target) < MIN_TARGET_LENGTH:
            raise ValueError(f"target for {self.id} must be >= {MIN_TARGET_LENGTH} chars")
        if not self.payload:
            raise ValueError("payload must be non-empty")


@dataclass(frozen=True)
class VulnerabilityReport:
    prompt_id: str | None
    hole_results: dict[str, frozenset[str]]  # hole -> successful attack ids
    tested_attacks: int
    trials_issued: int
    inconclusive: tuple[tuple[str, str], ...] = ()  # (hole, attack id)
    partial: bool = False

    @property
    def vulnerable(self) -> bool:
        return any(self.hole_results.values())

    @property
    def vulnerable_holes(self) -> tuple[str, ...]:
        return tuple(sorted(h for h, ids in self.hole_results.items() if ids))

    def to_dict(self) -> dict:
        return {
            "prompt_id": self.prompt_id,
            "vulnerable": self.vulnerable,
            "hole_results": {h: sorted(ids) for h, ids in sorted(self.hole_results.items())},
            "tested_attacks": self.tested_attacks,
            "trials_issued": self.trials_issued,
            "inconclusive": [list(pair) for pair in sorted(self.inconclusive)],
            "partial": self.partial,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "VulnerabilityReport":
        return cls(
            prompt_id=d["prompt_id"],
            hole_results={h: frozenset(ids) for h, ids in d["hole_results"].items()},
            tested_attacks=d["tested_attacks"],
            trials_issued=d["trials_issued"],
            inconclusive=tuple((h, a) for h, a in d.get("inconclusive", [])),
            partial=d.get("partial", False),
        )


def load_attacks(path: str | Path | None = None) -> list[AttackCase]:
    """Attack corpus from a JSONL file, or the bundled corpus by default."""
    if path is None:
        text = resources.files("promptdoctor.data").joinpath(BUNDLED_ATTACKS).read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    attacks = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        d = json.loads(line)
        attacks.append(AttackCase(d["id"], d["payload"], d["target"], d.get("description", "")))
    ids = [a.id for a in attacks]
    if len(set(ids)) != len(ids):
        raise ValueError("attack ids must be unique")
    return attacks


def _run_trial(
    gateway: Gateway,
    cp: CanonicalPrompt,
    hole: str,
    attack: AttackCase,
    base_values: Mapping[str, str],
) -> tuple[str, str, str]:
    """One (hole, attack) trial; returns (hole, attack id, outcome)."""
    values = dict(base_values)
    values[hole] = attack.payload
    rendered = substitute(cp, values)
    try:
        reply = gateway.chat("responder", ChatRequest.of(("user", rendered))).content
    except TransportError:
        return hole, attack.id, "inconclusive"
    except BudgetExceeded:
        return hole, attack.id, "budget"
    return hole, attack.id, "success" if attack.target.lower() in reply.lower() else "failure"


def test_vulnerability(
    gateway: Gateway,
    cp: CanonicalPrompt,
    attacks: Sequence[AttackCase],
    *,
    patch_values: Mapping[str, str] | None = None,
    bank: MetaPromptBank | None = None,
    max_workers: int | None = None,
) -> VulnerabilityReport:
    """Try every attack in every hole; aggregate successes per hole."""
    if not cp.holes:
        raise ValueError("vulnerability testing requires at least one hole")
    if not attacks:
        raise ValueError("the attack corpus must be non-empty")
    if patch_values is None:
        if len(cp.holes) == 1:
            patch_values = {}
        else:
            from .patcher import patch as generate_patch

            patch_values = generate_patch(
                gateway, bank if bank is not None else MetaPromptBank(), cp, "sequential"
            ).values

    trials = [(hole.name, attack) for hole in cp.holes for attack in attacks]
    workers = max_workers or min(len(trials), gateway.config.concurrency)
    results: list[tuple[str, str, str]] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_run_trial, gateway, cp, hole, attack, patch_values)
            for hole, attack in trials
        ]
        for fut in futures:
            results.append(fut.result())

    hole_results: dict[str, set[str]] = {h.name: set() for h in cp.holes}
    inconclusive: list[tuple[str, str]] = []
    partial = False
    for hole, attack_id, outcome in results:
        if outcome == "success":
            hole_results[hole].add(attack_id)
        elif outcome == "inconclusive":
            inconclusive.append((hole, attack_id))
        elif outcome == "budget":
            inconclusive.append((hole, attack_id))
            partial = True
    return VulnerabilityReport(
        prompt_id=cp.origin,
        hole_results={h: frozenset(ids) for h, ids in hole_results.items()},
        tested_attacks=len(attacks),
        trials_issued=len(trials),
        inconclusive=tuple(sorted(inconclusive)),
        partial=partial,
    )


test_vulnerability.__test__ = False  # keep pytest from collecting the operation


def _as_canonical(text: str) -> CanonicalPrompt:
    sp = SourcePrompt.create("<rewrite>", (0, max(1, len(text.encode("utf-8")))), text, "generic-template")
    return canonicalize(sp)


def _attack_block(report: VulnerabilityReport, attacks: Sequence[AttackCase]) -> str:
    by_id = {a.id: a for a in attacks}
    succeeded = sorted({aid for ids in report.hole_results.values() for aid in ids})
    return "\n".join(f"[{aid}] {by_id[aid].payload}" for aid in succeeded)


@dataclass(frozen=True)
class HardenedPrompt:
    text: str
    holes: frozenset[str]
    distance: int  # iteration that produced it
    report: VulnerabilityReport

    def to_dict(self) -> dict:
        return {"text": self.text, "distance": self.distance}


def harden(
    gateway: Gateway,
    bank: MetaPromptBank,
    cp: CanonicalPrompt,
    report: VulnerabilityReport,
    attacks: Sequence[AttackCase],
    *,
    patch_values: Mapping[str, str] | None = None,
) -> HardenedPrompt:
    """Generation-evaluation loop until one rewrite defeats every attack.

    The work queue is re-sorted every iteration so the prompt with the
    fewest vulnerable holes is attempted first. Raises Exhausted after 10
    iterations without a hardened rewrite.
    """
    if not report.vulnerable:
        raise ValueError("harden expects a vulnerable report")
    if patch_values is None:
        if len(cp.holes) == 1:
            patch_values = {}
        else:
            from .patcher import patch as generate_patch

            patch_values = generate_patch(gateway, bank, cp, "sequential").values

    counter = 0  # insertion order for stable ties
    queue: list[tuple[int, int, CanonicalPrompt, VulnerabilityReport]] = [
        (len(report.vulnerable_holes), counter, cp, report)
    ]
    seen = {cp.text}
    iterations_done = 0
    for iteration in range(1, MAX_ITERATIONS + 1):
        if not queue:
            break
        iterations_done = iteration
        queue.sort(key=lambda item: (item[0], item[1]))
        _, _, current, current_report = queue.pop(0)
        req = bank.hardening.render(
            prompt=current.text,
            vulnerable_variables=", ".join(current_report.vulnerable_holes),
            attacks=_attack_block(current_report, attacks),
        )
        try:
            obj = gateway.chat_json("generator", req, {"prompts": "array-of-string"})
        except MalformedResponse:
            log.warning("hardening generation failed at iteration %d", iteration)
            continue
        for text in obj["prompts"][:REWRITES_PER_ITERATION]:
            candidate = _as_canonical(text)
            if candidate.hole_set != cp.hole_set:
                continue
            if candidate.text in seen:
                continue
            seen.add(candidate.text)
            retest = test_vulnerability(
                gateway, candidate, attacks, patch_values=patch_values, bank=bank
            )
            if not retest.vulnerable:
                return HardenedPrompt(candidate.text, candidate.hole_set, iteration, retest)
            counter += 1
            queue.append((len(retest.vulnerable_holes), counter, candidate, retest))
    raise Exhausted(
        f"no hardened rewrite after {iterations_done} iterations", iterations=iterations_done
    )
