"""Core prompt model: source prompts, canonical form, holes, substitution.

A canonical prompt renders every interpolation site as ``{name}``. Literal
braces are escaped as ``{{`` / ``}}`` so they can never parse as holes.
Canonicalization accepts two flavors of input:

* ``python-like`` -- the raw text is a source-level string expression
  (quoted literals, ``+`` concatenation, f-strings, ``.format(...)``,
  ``%``-interpolation). This is what the extractor produces.
* ``generic-template`` -- the raw text is already a bare template; only
  ``{name}`` fields are interpreted.

Positional or unnameable interpolation sites are assigned synthetic names
``PLACEHOLDER_k`` (1-based, in order of appearance).
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping

from .errors import CanonicalizationError, MissingValueError

LanguageHint = Literal["python-like", "generic-template"]

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_HOLE_TOKEN_RE = re.compile(r"\{\{|\}\}|\{([A-Za-z_][A-Za-z0-9_]*)\}")

# Callable/variable name fragments that mark a string as prompt-like.
DEFAULT_NAME_PATTERNS = ("prompt", "complete", "chat", "message", "content")

# Shortest canonical text worth keeping; aligned with corpus cleaning,
# which drops anything of 31 characters or less.
DEFAULT_MIN_CHARS = 32


@dataclass(frozen=True)
class Hole:
    """A named interpolation slot within a canonical prompt."""

    name: str
    index: int

    def __post_init__(self):
        if not _IDENT_RE.match(self.name):
            raise ValueError(f"hole name {self.name!r} is not identifier-like")


@dataclass(frozen=True)
class SourcePrompt:
    """A prompt string as it appears in a source file.

    ``span`` is a byte range into the file; ``raw`` is the decoded source
    text of that range (it may contain interpolation or concatenation
    syntax).
    """

    id: str
    file: str
    span: tuple[int, int]
    raw: str
    language_hint: LanguageHint = "python-like"

    def __post_init__(self):
        if not self.raw:
            raise ValueError("raw prompt text must be non-empty")
        if not self.span[0] < self.span[1]:
            raise ValueError(f"invalid span {self.span}")

    @staticmethod
    def make_id(file: str, span: tuple[int, int], raw: str) -> str:
        digest = hashlib.sha256(
            f"{file}\x00{span[0]}\x00{span[1]}\x00{raw}".encode("utf-8")
        ).hexdigest()
        return digest[:16]

    @classmethod
    def create(
        cls,
        file: str,
        span: tuple[int, int],
        raw: str,
        language_hint: LanguageHint = "python-like",
    ) -> "SourcePrompt":
        return cls(cls.make_id(file, span, raw), file, span, raw, language_hint)


@dataclass(frozen=True)
class CanonicalPrompt:
    """A prompt with every hole rendered as ``{name}``."""

    text: str
    holes: tuple[Hole, ...]
    origin: str | None = None

    @property
    def hole_names(self) -> tuple[str, ...]:
        return tuple(h.name for h in self.holes)

    @property
    def hole_set(self) -> frozenset[str]:
        return frozenset(h.name for h in self.holes)

    def with_origin(self, origin: str | None) -> "CanonicalPrompt":
        return CanonicalPrompt(self.text, self.holes, origin)


def hole_count(prompt: CanonicalPrompt) -> int:
    return len(prompt.holes)


@dataclass(frozen=True)
class PromptRecord:
    """One line of the canonical corpus JSONL interchange format."""

    id: str
    file: str
    span: tuple[int, int]
    text: str
    holes: tuple[str, ...]
    raw: str

    @classmethod
    def from_parts(cls, sp: SourcePrompt, cp: CanonicalPrompt) -> "PromptRecord":
        return cls(sp.id, sp.file, sp.span, cp.text, cp.hole_names, sp.raw)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "file": self.file,
            "span": [self.span[0], self.span[1]],
            "text": self.text,
            "holes": list(self.holes),
            "raw": self.raw,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PromptRecord":
        return cls(
            id=d["id"],
            file=d["file"],
            span=(int(d["span"][0]), int(d["span"][1])),
            text=d["text"],
            holes=tuple(d["holes"]),
            raw=d["raw"],
        )

    def canonical(self) -> CanonicalPrompt:
        holes = tuple(Hole(name, i) for i, name in enumerate(self.holes))
        return CanonicalPrompt(self.text, holes, origin=self.id)

    def source(self, language_hint: LanguageHint = "python-like") -> SourcePrompt:
        return SourcePrompt(self.id, self.file, self.span, self.raw, language_hint)


# ---------------------------------------------------------------------------
# Canonical text assembly
# ---------------------------------------------------------------------------


class _Canonicalizer:
    """Accumulates canonical text while registering holes in order."""

    def __init__(self):
        self.parts: list[str] = []
        self.holes: list[Hole] = []
        self._by_name: dict[str, Hole] = {}
        self._placeholder_counter = 0

    def literal(self, text: str):
        self.parts.append(text.replace("{", "{{").replace("}", "}}"))

    def verbatim(self, text: str):
        self.parts.append(text)

    def hole(self, name: str):
        if name not in self._by_name:
            h = Hole(name, len(self.holes))
            self._by_name[name] = h
            self.holes.append(h)
        self.parts.append("{" + name + "}")

    def placeholder(self):
        while True:
            self._placeholder_counter += 1
            name = f"PLACEHOLDER_{self._placeholder_counter}"
            if name not in self._by_name:
                break
        self.hole(name)

    def named_or_placeholder(self, expr_text: str):
        name = sanitize_hole_name(expr_text)
        if name:
            self.hole(name)
        else:
            self.placeholder()

    def build(self, origin: str | None) -> CanonicalPrompt:
        return CanonicalPrompt("".join(self.parts), tuple(self.holes), origin)


def sanitize_hole_name(expr_text: str) -> str | None:
    """Reduce a source expression to an identifier-like hole name.

    ``user.name`` becomes ``user_name``; anything that cannot be reduced
    (numbers, empty slots) yields ``None`` so the caller can fall back to a
    synthetic placeholder.
    """
    text = expr_text.strip()
    if _IDENT_RE.match(text):
        return text
    candidate = re.sub(r"[^A-Za-z0-9_]+", "_", text).strip("_")
    candidate = re.sub(r"_+", "_", candidate)
    if candidate and _IDENT_RE.match(candidate):
        return candidate
    return None


# ---------------------------------------------------------------------------
# Literal-body scanning (shared by both language flavors)
# ---------------------------------------------------------------------------

_SIMPLE_ESCAPES = {
    "n": "\n",
    "t": "\t",
    "r": "\r",
    "\\": "\\",
    "'": "'",
    '"': '"',
    "a": "\a",
    "b": "\b",
    "f": "\f",
    "v": "\v",
    "0": "\0",
    "\n": "",  # line continuation inside a literal
}

_PERCENT_CODE_RE = re.compile(r"%(?:\((?P<name>[A-Za-z_][A-Za-z0-9_]*)\))?[-+ #0-9.*]*[sdifrxXeEgGc%]")


def _decode_escape(body: str, i: int) -> tuple[str, int]:
    """Decode the escape sequence starting at ``body[i] == '\\'``."""
    if i + 1 >= len(body):
        return "\\", i + 1
    c = body[i + 1]
    if c in _SIMPLE_ESCAPES:
        return _SIMPLE_ESCAPES[c], i + 2
    if c == "x" and i + 4 <= len(body):
        hexpart = body[i + 2 : i + 4]
        try:
            return chr(int(hexpart, 16)), i + 4
        except ValueError:
            return "\\x", i + 2
    if c == "u" and i + 6 <= len(body):
        hexpart = body[i + 2 : i + 6]
        try:
            return chr(int(hexpart, 16)), i + 6
        except ValueError:
            return "\\u", i + 2
    return "\\" + c, i + 2


def _scan_literal_body(
    canon: _Canonicalizer,
    body: str,
    *,
    is_fstring: bool,
    is_raw: bool,
    fmt_args: "_FormatArgs | None",
    pct_args: "list[str] | None",
    strict_braces: bool,
    pct_state: "list[int] | None" = None,
):
    """Walk one string-literal body, emitting literal text and holes.

    ``strict_braces`` applies f-string rules: an unmatched brace is a hard
    canonicalization error instead of being escaped into literal text.
    ``pct_state`` carries the %-argument cursor across implicitly
    concatenated literals of one chain element.
    """
    if pct_state is None:
        pct_state = [0]
    i = 0
    n = len(body)
    while i < n:
        c = body[i]
        if c == "\\" and not is_raw:
            decoded, i = _decode_escape(body, i)
            canon.literal(decoded)
            continue
        if c == "{":
            if i + 1 < n and body[i + 1] == "{":
                canon.verbatim("{{")
                i += 2
                continue
            end = _matching_brace(body, i)
            if end is None:
                if strict_braces and is_fstring:
                    raise CanonicalizationError("unbalanced '{' in f-string")
                canon.verbatim("{{")
                i += 1
                continue
            content = body[i + 1 : end]
            _emit_field(canon, content, is_fstring=is_fstring, fmt_args=fmt_args, is_raw=is_raw)
            i = end + 1
            continue
        if c == "}":
            if i + 1 < n and body[i + 1] == "}":
                canon.verbatim("}}")
                i += 2
                continue
            if strict_braces and is_fstring:
                raise CanonicalizationError("unbalanced '}' in f-string")
            canon.verbatim("}}")
            i += 1
            continue
        if c == "%" and pct_args is not None:
            m = _PERCENT_CODE_RE.match(body, i)
            if m:
                if m.group(0) == "%%":
                    canon.literal("%")
                elif m.group("name"):
                    canon.hole(m.group("name"))
                elif pct_state[0] < len(pct_args):
                    canon.named_or_placeholder(pct_args[pct_state[0]])
                    pct_state[0] += 1
                else:
                    canon.literal(m.group(0))
                i = m.end()
                continue
        canon.literal(c)
        i += 1


def _matching_brace(body: str, start: int) -> int | None:
    """Index of the ``}`` closing the ``{`` at ``start``, or None."""
    depth = 0
    for j in range(start, len(body)):
        if body[j] == "{":
            depth += 1
        elif body[j] == "}":
            depth -= 1
            if depth == 0:
                return j
    return None


def _emit_field(
    canon: _Canonicalizer,
    content: str,
    *,
    is_fstring: bool,
    fmt_args: "_FormatArgs | None",
    is_raw: bool = False,
):
    """Resolve one ``{...}`` field into a hole, placeholder, or literal."""
    base = content
    # strip conversion and format-spec suffixes: {x!r}, {x:>10}, {x:{w}}
    bang = _top_level_index(base, "!")
    if bang is not None:
        base = base[:bang]
    colon = _top_level_index(base, ":")
    if colon is not None:
        base = base[:colon]
    base = base.strip()

    if base == "" or base.isdigit():
        arg = fmt_args.positional_at(int(base) if base.isdigit() else None) if fmt_args else None
        if arg is not None:
            canon.named_or_placeholder(arg)
        else:
            canon.placeholder()
        return
    if _IDENT_RE.match(base):
        canon.hole(base)
        return
    if is_fstring or fmt_args is not None:
        canon.named_or_placeholder(base)
        return
    # Plain string, non-identifier content: literal braces (e.g. inline JSON).
    if not is_raw:
        decoded = []
        j = 0
        while j < len(content):
            if content[j] == "\\":
                piece, j = _decode_escape(content, j)
                decoded.append(piece)
            else:
                decoded.append(content[j])
                j += 1
        content = "".join(decoded)
    canon.verbatim("{{")
    canon.literal(content)
    canon.verbatim("}}")


def _top_level_index(text: str, char: str) -> int | None:
    depth = 0
    for j, c in enumerate(text):
        if c in "([{":
            depth += 1
        elif c in ")]}":
            depth -= 1
        elif c == char and depth == 0:
            return j
    return None


class _FormatArgs:
    """Arguments attached to a ``.format(...)`` call, as source text."""

    def __init__(self, positional: list[str], keywords: dict[str, str]):
        self.positional = positional
        self.keywords = keywords
        self._auto_index = 0

    def positional_at(self, index: int | None) -> str | None:
        if index is None:
            index = self._auto_index
            self._auto_index += 1
        if 0 <= index < len(self.positional):
            return self.positional[index]
        return None


# ---------------------------------------------------------------------------
# Python-like source expression parsing
# ---------------------------------------------------------------------------

_STR_PREFIX_RE = re.compile(r"[rRbBuUfF]{0,3}")


@dataclass
class _StrTok:
    body: str
    is_f: bool
    is_raw: bool
    is_bytes: bool
    start: int
    end: int


def _read_string_token(text: str, pos: int) -> _StrTok | None:
    """Parse one string literal starting at ``pos`` (prefix included)."""
    m = _STR_PREFIX_RE.match(text, pos)
    prefix = m.group(0) if m else ""
    qpos = pos + len(prefix)
    if qpos >= len(text) or text[qpos] not in "\"'":
        return None
    quote_char = text[qpos]
    if text.startswith(quote_char * 3, qpos):
        quote = quote_char * 3
    else:
        quote = quote_char
    i = qpos + len(quote)
    body_start = i
    while i < len(text):
        if text[i] == "\\" and len(quote) >= 1 and "r" not in prefix.lower():
            i += 2
            continue
        if text.startswith(quote, i):
            return _StrTok(
                body=text[body_start:i],
                is_f="f" in prefix.lower(),
                is_raw="r" in prefix.lower(),
                is_bytes="b" in prefix.lower(),
                start=pos,
                end=i + len(quote),
            )
        if len(quote) == 1 and text[i] == "\n":
            return None  # unterminated single-quoted literal
        i += 1
    return None


def _skip_ws(text: str, i: int) -> int:
    while i < len(text):
        if text[i] in " \t\r\n":
            i += 1
        elif text[i] == "\\" and i + 1 < len(text) and text[i + 1] == "\n":
            i += 2
        else:
            break
    return i


def _read_atom(text: str, pos: int) -> tuple[str, int] | None:
    """Read an identifier-rooted expression: ``a.b['k'](x)`` and the like."""
    m = re.compile(r"[A-Za-z_][A-Za-z0-9_]*").match(text, pos)
    if not m:
        return None
    i = m.end()
    while i < len(text):
        if text[i] == ".":
            m2 = re.compile(r"\.[A-Za-z_][A-Za-z0-9_]*").match(text, i)
            if not m2:
                break
            i = m2.end()
        elif text[i] in "([":
            close = _matching_bracket(text, i)
            if close is None:
                return None
            i = close + 1
        else:
            break
    return text[pos:i], i


def _matching_bracket(text: str, start: int) -> int | None:
    pairs = {"(": ")", "[": "]", "{": "}"}
    open_c = text[start]
    close_c = pairs[open_c]
    depth = 0
    i = start
    while i < len(text):
        c = text[i]
        if c in "\"'" or (c in "rRbBuUfF" and _read_string_token(text, i)):
            tok = _read_string_token(text, i)
            if tok:
                i = tok.end
                continue
        if c == open_c:
            depth += 1
        elif c == close_c:
            depth -= 1
            if depth == 0:
                return i
        i += 1
    return None


def _split_top_level(argtext: str) -> list[str]:
    out = []
    depth = 0
    cur = []
    i = 0
    while i < len(argtext):
        c = argtext[i]
        tok = _read_string_token(argtext, i) if c in "\"'rRbBuUfF" else None
        if tok:
            cur.append(argtext[i : tok.end])
            i = tok.end
            continue
        if c in "([{":
            depth += 1
        elif c in ")]}":
            depth -= 1
        if c == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
        else:
            cur.append(c)
        i += 1
    tail = "".join(cur).strip()
    if tail:
        out.append(tail)
    return out


def _parse_format_args(argtext: str) -> _FormatArgs:
    positional: list[str] = []
    keywords: dict[str, str] = {}
    for piece in _split_top_level(argtext):
        m = re.match(r"([A-Za-z_][A-Za-z0-9_]*)\s*=(?!=)(.*)\Z", piece, re.S)
        if m:
            keywords[m.group(1)] = m.group(2).strip()
        else:
            positional.append(piece)
    return _FormatArgs(positional, keywords)


@dataclass
class _ChainElement:
    kind: Literal["str", "var"]
    tokens: list[_StrTok] = field(default_factory=list)
    expr: str = ""
    fmt_args: _FormatArgs | None = None
    pct_args: list[str] | None = None


def _parse_chain(raw: str) -> list[_ChainElement]:
    """Parse a concatenation chain of literals and variables.

    Raises CanonicalizationError when nothing parseable is found.
    """
    elements: list[_ChainElement] = []
    i = _skip_ws(raw, 0)
    opened = 0
    while i < len(raw) and raw[i] == "(":
        opened += 1
        i = _skip_ws(raw, i + 1)
    expect_operand = True
    while i < len(raw):
        if expect_operand:
            tok = _read_string_token(raw, i)
            if tok is not None:
                if tok.is_bytes:
                    raise CanonicalizationError("bytes literal is not a prompt")
                elem = _ChainElement(kind="str", tokens=[tok])
                i = _skip_ws(raw, tok.end)
                # implicit concatenation of adjacent literals
                while True:
                    nxt = _read_string_token(raw, i)
                    if nxt is None:
                        break
                    elem.tokens.append(nxt)
                    i = _skip_ws(raw, nxt.end)
                # .format(...) suffix
                if raw.startswith(".format", i):
                    j = _skip_ws(raw, i + len(".format"))
                    if j < len(raw) and raw[j] == "(":
                        close = _matching_bracket(raw, j)
                        if close is None:
                            raise CanonicalizationError("unterminated .format call")
                        elem.fmt_args = _parse_format_args(raw[j + 1 : close])
                        i = _skip_ws(raw, close + 1)
                # % (a, b) suffix
                elif i < len(raw) and raw[i] == "%" and not raw.startswith("%=", i):
                    j = _skip_ws(raw, i + 1)
                    if j < len(raw) and raw[j] == "(":
                        close = _matching_bracket(raw, j)
                        if close is None:
                            raise CanonicalizationError("unterminated % argument tuple")
                        elem.pct_args = _split_top_level(raw[j + 1 : close])
                        i = _skip_ws(raw, close + 1)
                    else:
                        got = _read_atom(raw, j)
                        if got is None:
                            raise CanonicalizationError("unparseable % argument")
                        elem.pct_args = [got[0]]
                        i = _skip_ws(raw, got[1])
                elements.append(elem)
            else:
                got = _read_atom(raw, i)
                if got is None:
                    raise CanonicalizationError(f"unparseable chain element at offset {i}")
                expr, j = got
                elements.append(_ChainElement(kind="var", expr=expr))
                i = _skip_ws(raw, j)
            expect_operand = False
        else:
            c = raw[i]
            if c == "+":
                i = _skip_ws(raw, i + 1)
                expect_operand = True
            elif c == ")" and opened > 0:
                opened -= 1
                i = _skip_ws(raw, i + 1)
            elif c == "," and i == len(raw.rstrip(", \t\r\n")) :
                break
            else:
                raise CanonicalizationError(f"unexpected token {c!r} at offset {i}")
    if expect_operand and elements:
        raise CanonicalizationError("chain ends after '+'")
    if not any(e.kind == "str" for e in elements):
        raise CanonicalizationError("no string literal in expression")
    return elements


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def canonicalize(p: SourcePrompt) -> CanonicalPrompt:
    """Rewrite a source prompt into hole-delimited canonical form."""
    canon = _Canonicalizer()
    if p.language_hint == "generic-template":
        _scan_literal_body(
            canon,
            p.raw,
            is_fstring=False,
            is_raw=True,
            fmt_args=None,
            pct_args=None,
            strict_braces=False,
        )
    else:
        for elem in _parse_chain(p.raw):
            if elem.kind == "var":
                canon.named_or_placeholder(elem.expr)
                continue
            pct_state = [0]
            for tok in elem.tokens:
                _scan_literal_body(
                    canon,
                    tok.body,
                    is_fstring=tok.is_f,
                    is_raw=tok.is_raw,
                    fmt_args=elem.fmt_args,
                    pct_args=elem.pct_args,
                    strict_braces=True,
                    pct_state=pct_state,
                )
    return canon.build(p.id)


def substitute(
    cp: CanonicalPrompt,
    values: Mapping[str, str],
    *,
    escape_values: bool = False,
) -> str:
    """Replace every hole with its value.

    With ``escape_values=False`` (the default) the result is final text for
    model consumption: escaped braces collapse to single braces and values
    are inserted verbatim. With ``escape_values=True`` the result stays in
    canonical form: existing escapes are preserved and braces inside values
    are escaped on insertion, so re-canonicalizing the output can never
    invent a new hole.
    """
    missing = [h.name for h in cp.holes if h.name not in values]
    if missing:
        raise MissingValueError(missing[0])

    def repl(m: re.Match) -> str:
        tok = m.group(0)
        if tok == "{{":
            return "{{" if escape_values else "{"
        if tok == "}}":
            return "}}" if escape_values else "}"
        value = values[m.group(1)]
        if escape_values:
            return value.replace("{", "{{").replace("}", "}}")
        return value

    return _HOLE_TOKEN_RE.sub(repl, cp.text)


def partial_substitute(cp: CanonicalPrompt, values: Mapping[str, str]) -> CanonicalPrompt:
    """Fill a subset of holes, returning a new canonical prompt.

    Inserted values have their braces escaped so the result remains valid
    canonical text; untouched holes keep their markers and are re-indexed
    by first appearance.
    """
    canon = _Canonicalizer()
    pos = 0
    for m in _HOLE_TOKEN_RE.finditer(cp.text):
        canon.verbatim(cp.text[pos : m.start()])
        pos = m.end()
        tok = m.group(0)
        if tok in ("{{", "}}"):
            canon.verbatim(tok)
        else:
            name = m.group(1)
            if name in values:
                canon.verbatim(values[name].replace("{", "{{").replace("}", "}}"))
            else:
                canon.hole(name)
    canon.verbatim(cp.text[pos:])
    return canon.build(cp.origin)


def iter_records(pairs: Iterable[tuple[SourcePrompt, CanonicalPrompt]]) -> Iterable[PromptRecord]:
    for sp, cp in pairs:
        yield PromptRecord.from_parts(sp, cp)
