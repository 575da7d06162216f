"""Mock-value generation for prompt holes and synthetic dataset synthesis.

Sequential patching values holes in appearance order, each request seeing
the prompt with every earlier hole already filled; parallel patching values
every hole against the untouched prompt. Dataset synthesis repeats patching
with a stratified temperature ladder and shows previously generated values
as negative examples to fight duplication.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .corpus import TaskCategory
from .errors import DegenerateDataset
from .gateway import Gateway
from .metaprompts import MetaPromptBank
from .model import CanonicalPrompt, partial_substitute, substitute

log = logging.getLogger(__name__)

PATCH_MODES = ("sequential", "parallel")

GROUNDED_CATEGORIES = (
    TaskCategory.GRAMMAR_CORRECTION,
    TaskCategory.SUMMARIZATION,
    TaskCategory.TRANSLATION,
)

MAX_DUPLICATE_ATTEMPTS = 5
NEGATIVE_EXAMPLE_COUNT = 3


@dataclass(frozen=True)
class PatchSet:
    """Concrete values for every hole of one prompt."""

    prompt_id: str | None
    values: dict[str, str]  # insertion order follows hole appearance order
    mode: str = "sequential"

    def __post_init__(self):
        if self.mode not in PATCH_MODES:
            raise ValueError(f"unknown patch mode {self.mode!r}")

    def covers(self, cp: CanonicalPrompt) -> bool:
        return set(self.values) == set(cp.hole_names)

    @classmethod
    def empty(cls, cp: CanonicalPrompt, mode: str = "sequential") -> "PatchSet":
        return cls(cp.origin, {}, mode)


@dataclass(frozen=True)
class DatasetRow:
    values: dict[str, str]
    source: str | None = None
    reference: str | None = None

    def to_dict(self, split: str) -> dict:
        return {
            "values": dict(self.values),
            "source": self.source,
            "reference": self.reference,
            "split": split,
        }


@dataclass(frozen=True)
class SyntheticDataset:
    prompt_id: str | None
    rows: tuple[DatasetRow, ...]
    split: str  # "train" | "test"

    def __post_init__(self):
        if self.split not in ("train", "test"):
            raise ValueError(f"bad split {self.split!r}")
        if len(self.rows) < 1:
            raise ValueError("a dataset needs at least one row")

    @property
    def K(self) -> int:
        return len(self.rows)


def _value_for_hole(
    gateway: Gateway,
    bank: MetaPromptBank,
    display_text: str,
    hole: str,
    *,
    temperature: float | None,
    previous: list[str] | None = None,
) -> str:
    if previous:
        req = bank.dataset_patching.render(
            temperature=temperature,
            prompt=display_text,
            variable=hole,
            previous_values=json.dumps(previous, ensure_ascii=False),
        )
    else:
        req = bank.patching.render(temperature=temperature, prompt=display_text, variable=hole)
    obj = gateway.chat_json("generator", req, {"variable": "string", "value": "string"})
    if obj["variable"] != hole:
        log.debug("patch reply named %r, expected %r; using value anyway", obj["variable"], hole)
    return obj["value"]


def patch(
    gateway: Gateway,
    bank: MetaPromptBank,
    cp: CanonicalPrompt,
    mode: str = "sequential",
    *,
    temperature: float | None = None,
    negatives: Mapping[str, list[str]] | None = None,
) -> PatchSet:
    """Generate one mock value per hole, in the requested mode."""
    if mode not in PATCH_MODES:
        raise ValueError(f"unknown patch mode {mode!r}")
    if not cp.holes:
        raise ValueError("patching requires at least one hole")
    values: dict[str, str] = {}
    for hole in cp.holes:
        if mode == "sequential":
            display = partial_substitute(cp, values).text
        else:
            display = cp.text
        prev = list(negatives.get(hole.name, [])) if negatives else None
        values[hole.name] = _value_for_hole(
            gateway, bank, display, hole.name, temperature=temperature, previous=prev
        )
    return PatchSet(cp.origin, values, mode)


def _reference_for_row(
    gateway: Gateway,
    bank: MetaPromptBank,
    cp: CanonicalPrompt,
    row_values: Mapping[str, str],
    category: TaskCategory,
) -> tuple[str, str]:
    filled = substitute(cp, row_values)
    req = bank.reference_generation.render(prompt=filled, task=category.value)
    obj = gateway.chat_json(
        "generator", req, {"source": "string", "reference": "string"}
    )
    return obj["source"], obj["reference"]


def synthesize_dataset(
    gateway: Gateway,
    bank: MetaPromptBank,
    cp: CanonicalPrompt,
    category: TaskCategory,
    train_count: int,
    test_count: int,
    seed: int,
) -> tuple[SyntheticDataset, SyntheticDataset]:
    """Patch the prompt repeatedly into disjoint train/test row sets.

    Duplicate rows are regenerated up to MAX_DUPLICATE_ATTEMPTS times. A
    stubborn duplicate within its own split is accepted with a warning; one
    that collides with the other split would break train/test disjointness
    and raises DegenerateDataset, as does a >50% duplicate rate overall.
    """
    if train_count < 1 or test_count < 1:
        raise ValueError("train and test counts must be >= 1")
    if not cp.holes:
        raise ValueError("dataset synthesis requires at least one hole")

    rng = random.Random(seed)
    ladder = gateway.config.temperature_ladder
    history: dict[str, list[str]] = {h.name: [] for h in cp.holes}
    seen: dict[str, str] = {}  # substituted text -> split
    duplicates = 0
    grounded = category in GROUNDED_CATEGORIES

    def generate_row(row_index: int, split: str) -> DatasetRow:
        nonlocal duplicates
        temperature = ladder[row_index % len(ladder)]
        values: dict[str, str] | None = None
        for _ in range(MAX_DUPLICATE_ATTEMPTS):
            negatives = {
                name: rng.sample(vals, min(NEGATIVE_EXAMPLE_COUNT, len(vals)))
                for name, vals in history.items()
                if vals
            }
            ps = patch(gateway, bank, cp, "sequential", temperature=temperature, negatives=negatives)
            values = ps.values
            for name, val in values.items():
                if val not in history[name]:
                    history[name].append(val)
            key = substitute(cp, values)
            if key not in seen:
                seen[key] = split
                break
        else:
            key = substitute(cp, values)
            duplicates += 1
            if seen.get(key, split) != split:
                raise DegenerateDataset(
                    "duplicate row crosses the train/test boundary after "
                    f"{MAX_DUPLICATE_ATTEMPTS} attempts"
                )
            log.warning("accepting duplicate dataset row after %d attempts", MAX_DUPLICATE_ATTEMPTS)
        if grounded:
            source, reference = _reference_for_row(gateway, bank, cp, values, category)
            return DatasetRow(values, source, reference)
        return DatasetRow(values)

    train_rows = [generate_row(i, "train") for i in range(train_count)]
    test_rows = [generate_row(train_count + i, "test") for i in range(test_count)]

    total = train_count + test_count
    if duplicates * 2 > total:
        raise DegenerateDataset(
            f"{duplicates}/{total} rows were duplicates after retries"
        )
    return (
        SyntheticDataset(cp.origin, tuple(train_rows), "train"),
        SyntheticDataset(cp.origin, tuple(test_rows), "test"),
    )


def save_datasets(path: str | Path, *datasets: SyntheticDataset):
    with open(path, "w", encoding="utf-8") as f:
        for ds in datasets:
            for row in ds.rows:
                f.write(json.dumps(row.to_dict(ds.split), ensure_ascii=False) + "\n")


def load_datasets(path: str | Path, prompt_id: str | None = None) -> tuple[SyntheticDataset, SyntheticDataset]:
    rows: dict[str, list[DatasetRow]] = {"train": [], "test": []}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            rows[d["split"]].append(DatasetRow(d["values"], d.get("source"), d.get("reference")))
    return (
        SyntheticDataset(prompt_id, tuple(rows["train"]), "train"),
        SyntheticDataset(prompt_id, tuple(rows["test"]), "test"),
    )
