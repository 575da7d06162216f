#!/usr/bin/env python3
"""Run the full lint pipeline over the bundled fixture corpus.

Uses the recorded mock script, so it runs offline and deterministically.
Artifacts land in ./artifacts: corpus.jsonl, stats.json, report.json.
"""

import sys
from pathlib import Path

from promptdoctor.cli import main

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"

if __name__ == "__main__":
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "artifacts"
    code = main(
        [
            "run",
            "--root", str(FIXTURES / "demo_project"),
            "--out-dir", out_dir,
            "--mock", str(FIXTURES / "mock_script.jsonl"),
            "--deterministic",
        ]
    )
    sys.exit(code)
