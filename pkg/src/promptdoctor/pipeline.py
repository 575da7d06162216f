"""End-to-end lint stages: extract, clean, sample, lint, report.

Each stage is a plain function over files and records so the CLI, the
HTTP service, and tests all drive the same code. A full run is
extract -> clean -> lint-bias -> lint-injection -> report.
"""

from __future__ import annotations

import hashlib
import json
import logging
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from . import bias as bias_mod
from . import injection as injection_mod
from .corpus import categorize, clean, stratified_sample
from .errors import Exhausted
from .extraction import ExtractionDiagnostics, extract_prompts
from .gateway import Gateway
from .metaprompts import BIAS_TYPES, MetaPromptBank
from .model import PromptRecord, canonicalize
from .patcher import PatchSet, patch
from .reports import LintReport, PromptEntry

log = logging.getLogger(__name__)

EPOCH_ISO = "1970-01-01T00:00:00Z"

SOURCE_SUFFIXES = {".py": "python-like", ".txt": "generic-template", ".prompt": "generic-template"}


def stage_extract(root: str | Path, *, min_chars: int | None = None) -> tuple[list[PromptRecord], ExtractionDiagnostics]:
    """Walk a directory tree and extract prompt records from known sources."""
    root = Path(root)
    diag = ExtractionDiagnostics()
    records: list[PromptRecord] = []
    files = sorted(p for p in root.rglob("*") if p.suffix in SOURCE_SUFFIXES and p.is_file())
    for path in files:
        hint = SOURCE_SUFFIXES[path.suffix]
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            diag.notes.append(f"{path}: {exc}")
            continue
        kwargs = {"min_chars": min_chars} if min_chars is not None else {}
        prompts = extract_prompts(
            text, hint, file=str(path), diagnostics=diag, **kwargs
        )
        for sp in prompts:
            records.append(PromptRecord.from_parts(sp, canonicalize(sp)))
    return records, diag


def stage_clean(records: Sequence[PromptRecord]):
    kept, stats = clean([r.canonical() for r in records])
    kept_ids = {cp.origin for cp in kept}
    return [r for r in records if r.id in kept_ids], stats


def stage_sample(records: Sequence[PromptRecord], confidence: float, error: float, seed: int):
    sampled = stratified_sample([r.canonical() for r in records], confidence, error, seed)
    sampled_ids = [cp.origin for cp in sampled]
    by_id = {r.id: r for r in records}
    return [by_id[i] for i in sampled_ids]


def _patch_for_record(gateway: Gateway, bank: MetaPromptBank, cp) -> PatchSet | None:
    if not cp.holes:
        return None
    return patch(gateway, bank, cp, "sequential")


def lint_bias_entry(gateway: Gateway, bank: MetaPromptBank, record: PromptRecord, patch_set: PatchSet | None) -> list[dict]:
    """All three bias checks for one prompt; repairs whatever is flagged."""
    cp = record.canonical()
    out = []
    for bias_type in BIAS_TYPES:
        finding = bias_mod.detect_bias(gateway, bank, cp, patch_set, bias_type)
        entry = finding.to_dict()
        entry["rewrites"] = []
        entry["partial"] = False
        if finding.flagged:
            result = bias_mod.debias(gateway, bank, cp, finding, patch_set)
            entry["rewrites"] = [c.to_dict() for c in result.candidates]
            entry["partial"] = result.partial
        out.append(entry)
    return out


def lint_injection_entry(
    gateway: Gateway,
    bank: MetaPromptBank,
    record: PromptRecord,
    patch_set: PatchSet | None,
    attacks,
) -> dict | None:
    cp = record.canonical()
    if not cp.holes:
        return None
    values = patch_set.values if patch_set else {}
    report = injection_mod.test_vulnerability(
        gateway, cp, attacks, patch_values=values, bank=bank
    )
    entry = report.to_dict()
    entry["hardened"] = None
    if report.vulnerable:
        try:
            hardened = injection_mod.harden(
                gateway, bank, cp, report, attacks, patch_values=values
            )
            entry["hardened"] = hardened.to_dict()
        except Exhausted as exc:
            log.warning("hardening exhausted for %s: %s", record.id, exc)
    return entry


@dataclass
class RunOptions:
    checks: tuple[str, ...] = ("bias", "injection")
    deterministic: bool = False
    categorize_prompts: bool = True


def run_lint(
    gateway: Gateway,
    bank: MetaPromptBank,
    records: Sequence[PromptRecord],
    attacks=None,
    options: RunOptions | None = None,
) -> LintReport:
    """Lint a corpus and assemble the report artifact."""
    opts = options or RunOptions()
    if attacks is None and "injection" in opts.checks:
        attacks = injection_mod.load_attacks()

    entries: list[PromptEntry] = []
    for record in records:
        cp = record.canonical()
        patch_set = _patch_for_record(gateway, bank, cp)
        entry = PromptEntry(record=record)
        if opts.categorize_prompts:
            entry.category = categorize(cp, gateway).value
        if "bias" in opts.checks:
            entry.bias = lint_bias_entry(gateway, bank, record, patch_set)
        if "injection" in opts.checks:
            entry.injection = lint_injection_entry(gateway, bank, record, patch_set, attacks)
        entries.append(entry)

    if opts.deterministic:
        run_id = hashlib.sha256(
            "\x00".join(r.id for r in records).encode("utf-8")
        ).hexdigest()[:12]
        created_at = EPOCH_ISO
    else:
        run_id = uuid.uuid4().hex[:12]
        created_at = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")

    return LintReport(
        run_id=run_id,
        created_at=created_at,
        prompts=entries,
        config=gateway.config.to_dict(),
        budget=gateway.usage(),
    )


def write_stats(stats, path: str | Path):
    Path(path).write_text(json.dumps(stats.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
