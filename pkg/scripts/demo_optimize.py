#!/usr/bin/env python3
"""Self-contained optimization demo against a simulated grader.

A grammar-correction prompt is optimized on a tiny synthetic dataset; the
simulated responder's output quality scales with a QUALITY_n marker in the
candidate prompt, so the loop visibly climbs. Writes the full run artifact
to optimization_run.json.
"""

import json
import re
import sys
from pathlib import Path

from promptdoctor.corpus import TaskCategory
from promptdoctor.gateway import GatewayConfig, Gateway, MockBackend
from promptdoctor.metaprompts import MetaPromptBank
from promptdoctor.model import SourcePrompt, canonicalize
from promptdoctor.optimizer import Hyperparams, optimize
from promptdoctor.patcher import DatasetRow, SyntheticDataset


class SimulatedGrader(MockBackend):
    """Replies degrade or improve with the QUALITY_n marker in the prompt."""

    def __init__(self):
        super().__init__([])
        self.seed_i = 0
        self.step_i = 0
        self.seed_texts = [f"QUALITY_2 tighten this sentence variant {i}: {{sentence}}" for i in range(4)]
        self.batches = [
            ["QUALITY_3 polish the sentence: {sentence}", "QUALITY_4 perfect the sentence: {sentence}"],
            ["QUALITY_4 perfect the sentence again: {sentence}"],
        ]

    def complete(self, role, request, temperature):
        rendered = request.rendered()
        if role.role == "generator":
            if "prompt-writing principles" in rendered:
                text = self.seed_texts[self.seed_i % len(self.seed_texts)]
                self.seed_i += 1
                return json.dumps({"prompt": text})
            batch = self.batches[self.step_i] if self.step_i < len(self.batches) else []
            self.step_i += 1
            return json.dumps({"prompts": batch})
        sentence = rendered.rsplit(": ", 1)[1] if ": " in rendered else ""
        m = re.search(r"QUALITY_(\d)", rendered)
        q = int(m.group(1)) if m else 0
        return "fixed " + " ".join(sentence.split()[:q])


def dataset(sentences, split):
    rows = tuple(DatasetRow({"sentence": s}, s, "fixed " + s) for s in sentences)
    return SyntheticDataset("demo", rows, split)


if __name__ == "__main__":
    source = canonicalize(
        SourcePrompt.create("demo", (0, 42), "QUALITY_1 tighten this: {sentence}", "generic-template")
    )
    train = dataset(("alpha beta gamma delta", "one two three four", "red green blue white"), "train")
    test = dataset(("north south east west", "spring summer autumn winter"), "test")
    gateway = Gateway(GatewayConfig(retry_base_ms=0, budget=10000), SimulatedGrader())
    run = optimize(
        gateway, MetaPromptBank(), source, TaskCategory.GRAMMAR_CORRECTION,
        train, test, Hyperparams(n_seeds=4, prompts_per_step=4, train_count=3, test_count=2),
        seed=7,
    )
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "optimization_run.json")
    out.write_text(run.to_json() + "\n")
    print(f"verdict: {run.verdict}")
    print(f"best prompt: {run.best.prompt.text}")
    print(f"train trail: {[round(s.best_so_far, 4) for s in run.steps]}")
    print(f"test scores: {run.test_scores}")
    print(f"artifact: {out}")
