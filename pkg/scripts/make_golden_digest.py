#!/usr/bin/env python3
"""Recompute and commit the golden report digest for the fixture corpus.

Run this after any intentional change to the fixture project, the mock
script, the bundled attack corpus, or report serialization. The acceptance
suite compares against the committed value byte-for-byte.
"""

import os
from pathlib import Path

from promptdoctor.gateway import Gateway, GatewayConfig, MockBackend
from promptdoctor.injection import load_attacks
from promptdoctor.metaprompts import MetaPromptBank
from promptdoctor.pipeline import RunOptions, run_lint, stage_clean, stage_extract

TESTS = Path(__file__).resolve().parent.parent / "tests"
OUT = TESTS / "fixtures" / "golden_digest.txt"


def main():
    os.chdir(TESTS / "fixtures" / "demo_project")
    records, _ = stage_extract(".")
    records, _ = stage_clean(records)
    gateway = Gateway(
        GatewayConfig(retry_base_ms=0),
        MockBackend.from_script(TESTS / "fixtures" / "mock_script.jsonl"),
    )
    report = run_lint(
        gateway,
        MetaPromptBank(),
        records,
        attacks=load_attacks(),
        options=RunOptions(deterministic=True),
    )
    OUT.write_text(report.digest() + "\n")
    print(f"prompts: {len(report.prompts)}  calls: {gateway.usage()['calls_made']}")
    print(f"digest:  {report.digest()}")
    print(f"written: {OUT}")


if __name__ == "__main__":
    main()
