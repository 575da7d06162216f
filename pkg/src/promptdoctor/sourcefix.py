"""Applying a chosen rewrite back into the source file it came from.

The original literal is located by byte span and verified against the
recorded raw text before anything is written, so a drifted file conflicts
instead of being corrupted. Writes are atomic (temp file + rename) and a
``.bak`` copy of the original file is kept next to it.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path

from .model import CanonicalPrompt, SourcePrompt, canonicalize, substitute

FIX_STATUSES = ("pending", "applied", "conflicted")


@dataclass(frozen=True)
class FixAction:
    prompt_id: str
    chosen_rewrite: str  # canonical text of the replacement
    file: str
    span: tuple[int, int]
    original_raw: str
    status: str = "pending"
    backup: str | None = None

    def __post_init__(self):
        if self.status not in FIX_STATUSES:
            raise ValueError(f"bad fix status {self.status!r}")

    def to_dict(self) -> dict:
        return {
            "prompt_id": self.prompt_id,
            "chosen_rewrite": self.chosen_rewrite,
            "file": self.file,
            "span": list(self.span),
            "status": self.status,
            "backup": self.backup,
        }


def _as_canonical(text: str) -> CanonicalPrompt:
    sp = SourcePrompt.create("<fix>", (0, max(1, len(text.encode("utf-8")))), text, "generic-template")
    return canonicalize(sp)


def _python_escape(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


def render_literal(canonical_text: str, style: str) -> str:
    """Render a canonical prompt as a source literal.

    ``python`` style emits an f-string when the prompt has holes (canonical
    hole markers and brace escapes are valid f-string syntax as-is); a
    hole-free prompt becomes a plain string with escapes collapsed.
    ``template`` style writes the canonical text verbatim.
    """
    cp = _as_canonical(canonical_text)
    if style == "template":
        return canonical_text
    if style != "python":
        raise ValueError(f"unknown literal style {style!r}")
    if cp.holes:
        return 'f"' + _python_escape(canonical_text) + '"'
    final = substitute(cp, {})
    return '"' + _python_escape(final) + '"'


def detect_style(original_raw: str) -> str:
    head = original_raw.lstrip()[:4]
    for prefix_len in (0, 1, 2):
        if len(head) > prefix_len and head[prefix_len] in "\"'":
            if head[:prefix_len].lower() in ("", "f", "r", "u", "b", "fr", "rf", "rb", "br"):
                return "python"
    return "template"


def apply_fix(action: FixAction) -> FixAction:
    """Apply a pending fix; returns the action with its final status.

    Conflicts (file content at the span no longer matches the recorded
    raw text) leave the file untouched and flip the status instead of
    raising, so callers can surface them to the user.
    """
    if action.status != "pending":
        raise ValueError(f"fix for {action.prompt_id} is {action.status}, not pending")
    path = Path(action.file)
    data = path.read_bytes()
    start, end = action.span
    expected = action.original_raw.encode("utf-8")
    if data[start:end] != expected:
        return replace(action, status="conflicted")

    style = detect_style(action.original_raw)
    literal = render_literal(action.chosen_rewrite, style).encode("utf-8")
    new_data = data[:start] + literal + data[end:]

    backup = str(path) + ".bak"
    Path(backup).write_bytes(data)

    fd, tmp_name = tempfile.mkstemp(dir=str(path.parent), prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(new_data)
        os.replace(tmp_name, str(path))
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return replace(action, status="applied", backup=backup)
