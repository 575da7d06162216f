"""Lint report artifacts: aggregation, lossless serialization, digests."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .model import PromptRecord


@dataclass
class PromptEntry:
    """Everything the suite found out about one prompt."""

    record: PromptRecord
    category: str | None = None
    bias: list[dict] = field(default_factory=list)
    injection: dict | None = None
    optimization: dict | None = None

    def to_dict(self) -> dict:
        return {
            "record": self.record.to_dict(),
            "category": self.category,
            "bias": list(self.bias),
            "injection": self.injection,
            "optimization": self.optimization,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PromptEntry":
        return cls(
            record=PromptRecord.from_dict(d["record"]),
            category=d.get("category"),
            bias=list(d.get("bias", [])),
            injection=d.get("injection"),
            optimization=d.get("optimization"),
        )

    @property
    def has_findings(self) -> bool:
        if any(b.get("explicit") or b.get("prone") for b in self.bias):
            return True
        return bool(self.injection and self.injection.get("vulnerable"))


@dataclass
class LintReport:
    run_id: str
    created_at: str
    prompts: list[PromptEntry]
    config: dict = field(default_factory=dict)
    budget: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "created_at": self.created_at,
            "prompts": [p.to_dict() for p in self.prompts],
            "config": self.config,
            "budget": self.budget,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "LintReport":
        return cls(
            run_id=d["run_id"],
            created_at=d["created_at"],
            prompts=[PromptEntry.from_dict(p) for p in d["prompts"]],
            config=dict(d.get("config", {})),
            budget=dict(d.get("budget", {})),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False, indent=2)

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def save(self, path: str | Path):
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "LintReport":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    @property
    def finding_count(self) -> int:
        return sum(1 for p in self.prompts if p.has_findings)

    def entry(self, prompt_id: str) -> PromptEntry | None:
        for p in self.prompts:
            if p.record.id == prompt_id:
                return p
        return None

    def summary(self) -> str:
        lines = [
            f"report {self.run_id} ({self.created_at})",
            f"prompts analyzed: {len(self.prompts)}",
        ]
        flagged_bias = sum(
            1 for p in self.prompts if any(b.get("explicit") or b.get("prone") for b in p.bias)
        )
        vulnerable = sum(1 for p in self.prompts if p.injection and p.injection.get("vulnerable"))
        lines.append(f"bias findings: {flagged_bias}")
        lines.append(f"injection-vulnerable: {vulnerable}")
        lines.append(f"model calls used: {self.budget.get('calls_made', 'n/a')}")
        return "\n".join(lines)
