"""Uniform model access: chat, strict-JSON chat, embeddings.

One gateway object serves four roles (generator, responder, judge,
embedder), each bound to a model id and temperature from config. All
network I/O in the package happens here. Tests and the golden pipeline run
against a scripted mock backend that is bit-reproducible and refuses
unscripted requests, so nothing outside this module can quietly hit the
network.

Mock script format (JSONL, one entry per line)::

    {"match": {"role": "generator", "digest": "<sha256 of rendered messages>"},
     "reply": "...", "fail_times": 0}
    {"match": {"role": "responder", "regex": "capital of France"},
     "reply": "...", "fail_times": 0}

Digest entries are checked first, then regex entries in file order.
``fail_times`` makes the entry raise a transient transport error that many
times before answering, to exercise retry paths.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import requests

from .errors import (
    AuthError,
    BudgetExceeded,
    ConfigError,
    MalformedResponse,
    TransportError,
    UnscriptedCallError,
)

API_KEY_ENV = "PROMPTDOCTOR_API_KEY"

ROLE_NAMES = ("generator", "responder", "judge", "embedder")

DEFAULT_TEMPERATURE_LADDER = (0.3, 0.7, 1.0, 1.3)


@dataclass(frozen=True)
class ModelRole:
    role: str
    model_id: str
    temperature: float = 0.0
    max_tokens: int = 1024

    def __post_init__(self):
        if self.role not in ROLE_NAMES:
            raise ConfigError(f"unknown role {self.role!r}")
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[tuple[str, str], ...]
    temperature: float | None = None  # overrides the role default

    def __post_init__(self):
        if not self.messages:
            raise ValueError("messages must be non-empty")
        if self.messages[0][0] not in ("system", "user"):
            raise ValueError("first message must be system or user")
        for role, _ in self.messages:
            if role not in ("system", "user", "assistant"):
                raise ValueError(f"bad message role {role!r}")

    @classmethod
    def of(cls, *messages: tuple[str, str], temperature: float | None = None) -> "ChatRequest":
        return cls(tuple(messages), temperature)

    def with_turns(self, *extra: tuple[str, str]) -> "ChatRequest":
        return ChatRequest(self.messages + tuple(extra), self.temperature)

    def rendered(self) -> str:
        return "\n".join(f"{role}: {content}" for role, content in self.messages)

    def digest(self) -> str:
        return hashlib.sha256(self.rendered().encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ChatResponse:
    content: str
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency_ms: int = 0


def _default_roles() -> dict[str, ModelRole]:
    # Detection and judging run cold; generation runs hot.
    return {
        "generator": ModelRole("generator", "gpt-4o", temperature=1.0),
        "responder": ModelRole("responder", "gpt-4o", temperature=0.0),
        "judge": ModelRole("judge", "gpt-4o", temperature=0.0, max_tokens=256),
        "embedder": ModelRole("embedder", "text-embedding-3-small", temperature=0.0, max_tokens=0),
    }


@dataclass
class GatewayConfig:
    endpoint: str = "https://api.openai.com/v1"
    api_key_env: str = API_KEY_ENV
    concurrency: int = 8
    budget: int = 5000
    retry_attempts: int = 3
    retry_base_ms: int = 500
    temperature_ladder: tuple[float, ...] = DEFAULT_TEMPERATURE_LADDER
    roles: dict[str, ModelRole] = field(default_factory=_default_roles)
    mock_script: str | None = None
    timeout_s: float = 60.0

    @classmethod
    def from_file(cls, path: str | Path) -> "GatewayConfig":
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: Mapping) -> "GatewayConfig":
        cfg = cls()
        for key in ("endpoint", "api_key_env", "concurrency", "budget",
                    "retry_attempts", "retry_base_ms", "mock_script", "timeout_s"):
            if key in data:
                setattr(cfg, key, data[key])
        if "temperature_ladder" in data:
            cfg.temperature_ladder = tuple(float(t) for t in data["temperature_ladder"])
        if "roles" in data:
            for name, spec in data["roles"].items():
                cfg.roles[name] = ModelRole(
                    role=name,
                    model_id=spec["model_id"],
                    temperature=float(spec.get("temperature", 0.0)),
                    max_tokens=int(spec.get("max_tokens", 1024)),
                )
        if cfg.concurrency < 1:
            raise ConfigError("concurrency must be >= 1")
        return cfg

    def to_dict(self) -> dict:
        return {
            "endpoint": self.endpoint,
            "api_key_env": self.api_key_env,
            "concurrency": self.concurrency,
            "budget": self.budget,
            "retry_attempts": self.retry_attempts,
            "retry_base_ms": self.retry_base_ms,
            "temperature_ladder": list(self.temperature_ladder),
            "mock_script": self.mock_script,
            "roles": {
                name: {
                    "model_id": r.model_id,
                    "temperature": r.temperature,
                    "max_tokens": r.max_tokens,
                }
                for name, r in sorted(self.roles.items())
            },
        }


# ---------------------------------------------------------------------------
# Backends
# ---------------------------------------------------------------------------


@dataclass
class CallRecord:
    role: str
    rendered: str
    reply: str | None
    error: str | None
    started: float
    finished: float


class HttpBackend:
    """OpenAI-compatible chat-completions and embeddings over HTTPS."""

    def __init__(self, config: GatewayConfig):
        self.config = config
        key = os.environ.get(config.api_key_env, "")
        if not key:
            raise ConfigError(
                f"no API key: set {config.api_key_env} or configure the mock backend"
            )
        self._headers = {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}

    def complete(self, role: ModelRole, request: ChatRequest, temperature: float) -> str:
        body = {
            "model": role.model_id,
            "messages": [{"role": r, "content": c} for r, c in request.messages],
            "temperature": temperature,
        }
        if role.max_tokens:
            body["max_tokens"] = role.max_tokens
        data = self._post("/chat/completions", body)
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"unexpected completion payload: {exc}") from exc

    def embed(self, role: ModelRole, texts: Sequence[str]) -> list[list[float]]:
        data = self._post("/embeddings", {"model": role.model_id, "input": list(texts)})
        try:
            items = sorted(data["data"], key=lambda d: d["index"])
            return [list(map(float, item["embedding"])) for item in items]
        except (KeyError, TypeError) as exc:
            raise TransportError(f"unexpected embedding payload: {exc}") from exc

    def _post(self, path: str, body: dict) -> dict:
        url = self.config.endpoint.rstrip("/") + path
        try:
            resp = requests.post(url, json=body, headers=self._headers, timeout=self.config.timeout_s)
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        if resp.status_code in (401, 403):
            raise AuthError(f"endpoint rejected credentials ({resp.status_code})")
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransportError(f"retryable status {resp.status_code}")
        if resp.status_code != 200:
            raise TransportError(f"status {resp.status_code}: {resp.text[:200]}")
        return resp.json()


@dataclass
class MockEntry:
    role: str | None
    digest: str | None
    regex: str | None
    reply: str
    fail_times: int = 0
    latency_s: float = 0.0

    @classmethod
    def from_dict(cls, d: Mapping) -> "MockEntry":
        match = d.get("match", {})
        return cls(
            role=match.get("role"),
            digest=match.get("digest"),
            regex=match.get("regex"),
            reply=d["reply"],
            fail_times=int(d.get("fail_times", 0)),
            latency_s=float(d.get("latency_s", 0.0)),
        )


class MockBackend:
    """Deterministic scripted backend; refuses unscripted requests."""

    EMBED_DIM = 32

    def __init__(self, entries: Iterable[MockEntry] = (), *, strict: bool = True):
        self.entries = list(entries)
        self.strict = strict
        self.calls: list[CallRecord] = []
        self._lock = threading.Lock()
        self._fail_counts = {i: e.fail_times for i, e in enumerate(self.entries)}

    @classmethod
    def from_script(cls, path: str | Path, *, strict: bool = True) -> "MockBackend":
        entries = []
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line:
                    entries.append(MockEntry.from_dict(json.loads(line)))
        return cls(entries, strict=strict)

    def add(self, *, role=None, digest=None, regex=None, reply="", fail_times=0, latency_s=0.0):
        entry = MockEntry(role, digest, regex, reply, fail_times, latency_s)
        with self._lock:
            self.entries.append(entry)
            self._fail_counts[len(self.entries) - 1] = fail_times
        return entry

    def _find(self, role_name: str, rendered: str, digest: str) -> tuple[int, MockEntry] | None:
        for i, e in enumerate(self.entries):
            if e.digest and e.digest == digest and (e.role is None or e.role == role_name):
                return i, e
        for i, e in enumerate(self.entries):
            if e.regex is not None and (e.role is None or e.role == role_name):
                if re.search(e.regex, rendered, re.S):
                    return i, e
        return None

    def complete(self, role: ModelRole, request: ChatRequest, temperature: float) -> str:
        rendered = request.rendered()
        started = time.monotonic()
        found = self._find(role.role, rendered, request.digest())
        if found is None:
            with self._lock:
                self.calls.append(CallRecord(role.role, rendered, None, "unscripted", started, time.monotonic()))
            if self.strict:
                raise UnscriptedCallError(
                    f"no mock entry for role={role.role} request:\n{rendered[:400]}"
                )
            return ""
        index, entry = found
        if entry.latency_s:
            time.sleep(entry.latency_s)
        with self._lock:
            if self._fail_counts.get(index, 0) > 0:
                self._fail_counts[index] -= 1
                self.calls.append(CallRecord(role.role, rendered, None, "scripted-failure", started, time.monotonic()))
                raise TransportError("scripted transient failure")
            self.calls.append(CallRecord(role.role, rendered, entry.reply, None, started, time.monotonic()))
        return entry.reply

    def embed(self, role: ModelRole, texts: Sequence[str]) -> list[list[float]]:
        with self._lock:
            for t in texts:
                self.calls.append(CallRecord(role.role, t, "<vector>", None, time.monotonic(), time.monotonic()))
        return [hashed_feature_vector(t, self.EMBED_DIM) for t in texts]


def hashed_feature_vector(text: str, dim: int) -> list[float]:
    """Deterministic bag-of-tokens embedding for the mock backend."""
    vec = [0.0] * dim
    tokens = re.findall(r"\w+", text.lower()) or [""]
    for tok in tokens:
        h = hashlib.sha256(tok.encode("utf-8")).digest()
        bucket = int.from_bytes(h[:4], "big") % dim
        sign = 1.0 if h[4] % 2 == 0 else -1.0
        vec[bucket] += sign
    norm = sum(x * x for x in vec) ** 0.5
    if norm == 0.0:
        vec[0] = 1.0
        norm = 1.0
    return [x / norm for x in vec]


# ---------------------------------------------------------------------------
# JSON extraction and schema checks
# ---------------------------------------------------------------------------

_FENCE_RE = re.compile(r"```(?:json|JSON)?\s*|```")

FieldSpec = Mapping[str, str]  # name -> "string" | "boolean" | "array-of-string"


def extract_json_object(text: str) -> dict | None:
    """First parseable JSON object in the text, tolerating fences and prose."""
    cleaned = _FENCE_RE.sub("", text)
    start = cleaned.find("{")
    while start != -1:
        depth = 0
        in_string = False
        escaped = False
        for i in range(start, len(cleaned)):
            c = cleaned[i]
            if in_string:
                if escaped:
                    escaped = False
                elif c == "\\":
                    escaped = True
                elif c == '"':
                    in_string = False
                continue
            if c == '"':
                in_string = True
            elif c == "{":
                depth += 1
            elif c == "}":
                depth -= 1
                if depth == 0:
                    try:
                        obj = json.loads(cleaned[start : i + 1])
                        if isinstance(obj, dict):
                            return obj
                    except json.JSONDecodeError:
                        pass
                    break
        start = cleaned.find("{", start + 1)
    return None


def validate_fields(obj: Mapping, schema: FieldSpec) -> str | None:
    """None when the object satisfies the schema, else a description."""
    for name, kind in schema.items():
        if name not in obj:
            return f"missing field {name!r}"
        value = obj[name]
        if kind == "string" and not isinstance(value, str):
            return f"field {name!r} must be a string"
        if kind == "boolean" and not isinstance(value, bool):
            return f"field {name!r} must be a boolean"
        if kind == "array-of-string":
            if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                return f"field {name!r} must be an array of strings"
    return None


# ---------------------------------------------------------------------------
# Gateway
# ---------------------------------------------------------------------------


class Gateway:
    """Role-routed model access with retries, rate cap, and budget."""

    def __init__(self, config: GatewayConfig | None = None, backend=None):
        self.config = config or GatewayConfig()
        if backend is None:
            if self.config.mock_script:
                backend = MockBackend.from_script(self.config.mock_script)
            else:
                backend = HttpBackend(self.config)
        self.backend = backend
        self._sem = threading.Semaphore(self.config.concurrency)
        self._lock = threading.Lock()
        self.calls_made = 0
        self.call_log: list[CallRecord] = []

    # -- budget ------------------------------------------------------------

    def _charge(self, units: int = 1):
        with self._lock:
            if self.calls_made + units > self.config.budget:
                raise BudgetExceeded(
                    f"budget of {self.config.budget} calls exhausted"
                )
            self.calls_made += units

    @property
    def budget_remaining(self) -> int:
        with self._lock:
            return self.config.budget - self.calls_made

    def usage(self) -> dict:
        with self._lock:
            return {"calls_made": self.calls_made, "budget": self.config.budget}

    # -- operations ----------------------------------------------------------

    def role(self, name: str) -> ModelRole:
        try:
            return self.config.roles[name]
        except KeyError:
            raise ConfigError(f"role {name!r} is not configured") from None

    def chat(self, role_name: str, request: ChatRequest) -> ChatResponse:
        role = self.role(role_name)
        temperature = request.temperature if request.temperature is not None else role.temperature
        last_error: Exception | None = None
        for attempt in range(self.config.retry_attempts):
            self._charge()
            started = time.monotonic()
            try:
                with self._sem:
                    content = self.backend.complete(role, request, temperature)
                finished = time.monotonic()
                with self._lock:
                    self.call_log.append(
                        CallRecord(role_name, request.rendered(), content, None, started, finished)
                    )
                return ChatResponse(
                    content=content,
                    prompt_tokens=sum(len(c) for _, c in request.messages) // 4,
                    completion_tokens=len(content) // 4,
                    latency_ms=int((finished - started) * 1000),
                )
            except TransportError as exc:
                last_error = exc
                with self._lock:
                    self.call_log.append(
                        CallRecord(role_name, request.rendered(), None, str(exc), started, time.monotonic())
                    )
                if attempt + 1 < self.config.retry_attempts:
                    time.sleep(self.config.retry_base_ms / 1000.0 * (2 ** attempt))
        raise TransportError(f"exhausted {self.config.retry_attempts} attempts: {last_error}")

    def chat_json(self, role_name: str, request: ChatRequest, schema: FieldSpec) -> dict:
        """Chat and parse a strict-JSON reply, re-prompting on bad shape."""
        current = request
        raw = ""
        for round_no in range(3):  # initial + 2 corrective re-prompts
            raw = self.chat(role_name, current).content
            obj = extract_json_object(raw)
            problem = validate_fields(obj, schema) if obj is not None else "no JSON object found"
            if obj is not None and problem is None:
                return obj
            correction = (
                f"Your previous reply was invalid: {problem}. "
                "Respond with ONLY a valid JSON object containing "
                + ", ".join(f"{name} ({kind})" for name, kind in schema.items())
                + ". DO NOT WRITE ANY TEXT OTHER THAN THE JSON OBJECT."
            )
            current = current.with_turns(("assistant", raw), ("user", correction))
        raise MalformedResponse("model reply failed JSON validation after 2 re-prompts", raw=raw)

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        if not texts:
            raise ValueError("texts must be non-empty")
        role = self.role("embedder")
        self._charge()
        for attempt in range(self.config.retry_attempts):
            try:
                with self._sem:
                    return self.backend.embed(role, texts)
            except TransportError:
                if attempt + 1 == self.config.retry_attempts:
                    raise
                time.sleep(self.config.retry_base_ms / 1000.0 * (2 ** attempt))
        raise TransportError("unreachable")


def mock_gateway(
    entries: Iterable[MockEntry] | MockBackend = (),
    *,
    budget: int = 5000,
    concurrency: int = 8,
    temperature_ladder: tuple[float, ...] = DEFAULT_TEMPERATURE_LADDER,
) -> Gateway:
    """A gateway wired to a strict scripted mock; retries do not sleep."""
    config = GatewayConfig(
        budget=budget,
        concurrency=concurrency,
        retry_base_ms=0,
        temperature_ladder=temperature_ladder,
        mock_script=None,
    )
    backend = entries if isinstance(entries, MockBackend) else MockBackend(entries)
    return Gateway(config, backend)
