"""Lexical extraction of prompt strings from source files.

This is deliberately regex/tokenizer-grade rather than a full parser: it
finds string literals, grows them into concatenation chains (``"a" + x +
"b"``, implicit concatenation, ``.format(...)`` and ``%`` suffixes), and
keeps the ones that look prompt-like: assigned to a matching variable or
keyword argument, or passed to a matching callee. Dynamic constructs it
cannot follow (ternaries, loops) are skipped and tallied.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import CanonicalizationError
from .model import (
    DEFAULT_MIN_CHARS,
    DEFAULT_NAME_PATTERNS,
    LanguageHint,
    SourcePrompt,
    _read_atom,
    _read_string_token,
    _skip_ws,
    canonicalize,
)


@dataclass
class ExtractionDiagnostics:
    """Tally of regions the extractor had to give up on."""

    strings_seen: int = 0
    chains_considered: int = 0
    skipped_unparseable: int = 0
    skipped_short: int = 0
    skipped_context: int = 0
    notes: list[str] = field(default_factory=list)


def _iter_string_starts(source: str):
    """Yield start offsets of top-level string literals, skipping comments."""
    i = 0
    n = len(source)
    while i < n:
        c = source[i]
        if c == "#":
            j = source.find("\n", i)
            i = n if j < 0 else j + 1
            continue
        tok = _read_string_token(source, i)
        if tok is not None:
            yield tok
            i = tok.end
            continue
        i += 1


_ATOM_BACK_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*\Z")


def _grow_chain_backward(source: str, start: int) -> int:
    """Extend a chain start leftward over leading ``name +`` operands."""
    while True:
        i = start - 1
        while i >= 0 and source[i].isspace():
            i -= 1
        if i < 0 or source[i] != "+":
            return start
        if i > 0 and source[i - 1] in "+-*/=<>!":
            return start
        i -= 1
        while i >= 0 and source[i].isspace():
            i -= 1
        end = i + 1
        while i >= 0 and (source[i].isalnum() or source[i] in "._"):
            i -= 1
        atom = source[i + 1 : end]
        if not atom or not _ATOM_BACK_RE.match(atom):
            return start
        start = i + 1


def _grow_chain(source: str, start_tok) -> tuple[int, int] | None:
    """Extend a string token into the longest parseable chain span."""
    end = start_tok.end
    i = _skip_ws(source, end)
    while True:
        # implicit concatenation
        nxt = _read_string_token(source, i)
        if nxt is not None:
            end = nxt.end
            i = _skip_ws(source, end)
            continue
        if source.startswith(".format", i):
            j = _skip_ws(source, i + len(".format"))
            if j < len(source) and source[j] == "(":
                close = _match_paren(source, j)
                if close is None:
                    return None
                end = close + 1
                i = _skip_ws(source, end)
                continue
            break
        if i < len(source) and source[i] == "%" and not source.startswith("%=", i):
            j = _skip_ws(source, i + 1)
            if j < len(source) and source[j] == "(":
                close = _match_paren(source, j)
                if close is None:
                    break
                end = close + 1
                i = _skip_ws(source, end)
                continue
            got = _read_atom(source, j)
            if got is None:
                break
            end = got[1]
            i = _skip_ws(source, end)
            continue
        if i < len(source) and source[i] == "+":
            j = _skip_ws(source, i + 1)
            nxt = _read_string_token(source, j)
            if nxt is not None:
                end = nxt.end
                i = _skip_ws(source, end)
                continue
            got = _read_atom(source, j)
            if got is None:
                return None  # `+` into something we cannot follow
            end = got[1]
            i = _skip_ws(source, end)
            continue
        break
    return (_grow_chain_backward(source, start_tok.start), end)


def _match_paren(source: str, open_pos: int) -> int | None:
    depth = 0
    i = open_pos
    n = len(source)
    while i < n:
        tok = _read_string_token(source, i)
        if tok is not None:
            i = tok.end
            continue
        c = source[i]
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
            if depth == 0:
                return i
        i += 1
    return None


_BACKSCAN_BUDGET = 600


def _context_names(source: str, chain_start: int, string_spans: list[tuple[int, int]]) -> list[str]:
    """Names that govern the chain: assigned variable, kwarg, callee."""
    names: list[str] = []
    limit = max(0, chain_start - _BACKSCAN_BUDGET)
    i = chain_start - 1

    def skip_strings(pos: int) -> int:
        for s, e in string_spans:
            if s <= pos < e:
                return s - 1
        return pos

    # immediate `name =` (assignment or keyword argument)
    have_assign = False
    j = i
    while j >= limit and source[j].isspace():
        j -= 1
    if j >= limit and source[j] == "=":
        k = j - 1
        while k >= limit and source[k] in "+-*/%":
            k -= 1
        if not (k >= limit and source[k] in "=!<>"):
            while k >= limit and source[k].isspace():
                k -= 1
            end = k + 1
            while k >= limit and (source[k].isalnum() or source[k] == "_"):
                k -= 1
            name = source[k + 1 : end]
            if name and not name[0].isdigit():
                names.append(name)
                have_assign = True
            i = k
    elif j >= limit and source[j] == ":":
        # `"content": "..."` inside a dict literal: the key is the context
        key = None
        k = j - 1
        while k >= limit and source[k].isspace():
            k -= 1
        for s, e in string_spans:
            if s <= k < e:
                tok = _read_string_token(source, s)
                if tok is not None:
                    key = tok.body
                break
        if key is None:
            return names  # block opener right before the string: a docstring
        names.append(key)
        i = k

    # walk outward looking for the enclosing call; a further `=` at depth 0
    # after an assignment was already found means we crossed a statement
    depth = 0
    while i >= limit:
        i = skip_strings(i)
        if i < limit:
            break
        c = source[i]
        if c in ")]}":
            depth += 1
        elif c == "(":
            if depth == 0:
                k = i - 1
                while k >= limit and source[k].isspace():
                    k -= 1
                end = k + 1
                while k >= limit and (source[k].isalnum() or source[k] in "._"):
                    k -= 1
                callee = source[k + 1 : end]
                if callee and re.match(r"[A-Za-z_]", callee):
                    names.append(callee)
                    break
                i = k  # grouping parens: keep scanning outward
                continue
            depth -= 1
        elif c in "[{":
            if depth > 0:
                depth -= 1
        elif c == "=" and depth == 0:
            if have_assign:
                break
            k = i - 1
            if k >= limit and source[k] in "=!<>+-*/%":
                i -= 1
                continue
            while k >= limit and source[k].isspace():
                k -= 1
            end = k + 1
            while k >= limit and (source[k].isalnum() or source[k] == "_"):
                k -= 1
            name = source[k + 1 : end]
            if name and not name[0].isdigit():
                names.append(name)
            break
        i -= 1
    return names


def _matches(names: list[str], patterns: tuple[str, ...]) -> bool:
    for name in names:
        lowered = name.lower()
        if any(p in lowered for p in patterns):
            return True
    return False


def _byte_offset(source: str, char_offset: int) -> int:
    return len(source[:char_offset].encode("utf-8"))


def extract_prompts(
    source_text: str,
    language_hint: LanguageHint = "python-like",
    *,
    file: str = "<memory>",
    name_patterns: tuple[str, ...] = DEFAULT_NAME_PATTERNS,
    min_chars: int = DEFAULT_MIN_CHARS,
    diagnostics: ExtractionDiagnostics | None = None,
) -> list[SourcePrompt]:
    """Find prompt-like string expressions in one source file.

    Deterministic: identical bytes yield identical prompt ids in the same
    order. Unparseable regions are skipped and tallied in ``diagnostics``.
    """
    diag = diagnostics if diagnostics is not None else ExtractionDiagnostics()

    if language_hint == "generic-template":
        text = source_text
        if not text.strip():
            return []
        sp = SourcePrompt.create(
            file, (0, len(text.encode("utf-8"))), text, "generic-template"
        )
        try:
            cp = canonicalize(sp)
        except CanonicalizationError:
            diag.skipped_unparseable += 1
            return []
        if len(cp.text) < min_chars:
            diag.skipped_short += 1
            return []
        return [sp]

    out: list[SourcePrompt] = []
    consumed_until = -1
    tokens = list(_iter_string_starts(source_text))
    string_spans = [(t.start, t.end) for t in tokens]
    for tok in tokens:
        diag.strings_seen += 1
        if tok.start < consumed_until:
            continue
        if tok.is_bytes:
            continue
        span = _grow_chain(source_text, tok)
        if span is None:
            diag.skipped_unparseable += 1
            continue
        diag.chains_considered += 1
        consumed_until = span[1]
        names = _context_names(source_text, span[0], string_spans)
        if not _matches(names, name_patterns):
            diag.skipped_context += 1
            continue
        raw = source_text[span[0] : span[1]]
        byte_span = (_byte_offset(source_text, span[0]), _byte_offset(source_text, span[1]))
        sp = SourcePrompt.create(file, byte_span, raw, "python-like")
        try:
            cp = canonicalize(sp)
        except CanonicalizationError:
            diag.skipped_unparseable += 1
            continue
        if len(cp.text) < min_chars:
            diag.skipped_short += 1
            continue
        out.append(sp)
    return out
