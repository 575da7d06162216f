"""Local HTTP service backing the browser review UI.

Endpoints:

* ``GET  /api/reports``               -- list stored reports
* ``GET  /api/reports/{id}``          -- one report, exactly as on disk
* ``GET  /api/prompts/{id}``          -- one prompt record from any report
* ``POST /api/analyze``               -- run checks on an ad-hoc prompt
* ``POST /api/fixes``                 -- apply a rewrite to its source file
* ``GET  /api/events``                -- server-sent progress events

Analyses run on a single worker so the gateway budget is honored; reads
are stateless apart from the report store.
"""

from __future__ import annotations

import json
import logging
import queue
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import bias as bias_mod
from . import injection as injection_mod
from .errors import BudgetExceeded, Exhausted
from .gateway import Gateway
from .metaprompts import BIAS_TYPES, MetaPromptBank
from .model import SourcePrompt, canonicalize
from .patcher import patch as generate_patch
from .reports import LintReport
from .sourcefix import FixAction, apply_fix

log = logging.getLogger(__name__)


class EventBus:
    """Fan-out of progress events to any number of SSE subscribers."""

    def __init__(self):
        self._subscribers: list[queue.Queue] = []
        self._lock = threading.Lock()

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue):
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def publish(self, event: dict):
        with self._lock:
            targets = list(self._subscribers)
        for q in targets:
            q.put(event)


class ReportStore:
    """Directory of report JSON files, addressed by run id."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def list(self) -> list[dict]:
        out = []
        for path in sorted(self.directory.glob("report-*.json")):
            try:
                report = LintReport.load(path)
            except (OSError, json.JSONDecodeError, KeyError):
                continue
            out.append(
                {
                    "run_id": report.run_id,
                    "created_at": report.created_at,
                    "prompts": len(report.prompts),
                    "findings": report.finding_count,
                }
            )
        return out

    def path_of(self, run_id: str) -> Path:
        return self.directory / f"report-{run_id}.json"

    def get_raw(self, run_id: str) -> dict | None:
        path = self.path_of(run_id)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def get(self, run_id: str) -> LintReport | None:
        raw = self.get_raw(run_id)
        return LintReport.from_dict(raw) if raw is not None else None

    def save(self, report: LintReport):
        report.save(self.path_of(report.run_id))


class AnalyzeBody(BaseModel):
    prompt_text: str = Field(min_length=1)
    checks: list[str] = Field(default_factory=lambda: ["bias", "injection"])


class FixBody(BaseModel):
    prompt_id: str
    rewrite_index: int = 0
    report_id: str | None = None
    kind: str = "bias"  # bias | injection


def _collect_rewrites(entry, kind: str) -> list[dict]:
    if kind == "injection":
        if entry.injection and entry.injection.get("hardened"):
            return [entry.injection["hardened"]]
        return []
    rewrites = []
    for b in entry.bias:
        rewrites.extend(b.get("rewrites", []))
    return rewrites


def create_app(
    store_dir: str | Path,
    gateway: Gateway | None = None,
    bank: MetaPromptBank | None = None,
    attacks_path: str | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="promptdoctor", docs_url=None, redoc_url=None)
    store = ReportStore(store_dir)
    bus = EventBus()
    bank = bank or MetaPromptBank()
    attacks = injection_mod.load_attacks(attacks_path)
    worker = ThreadPoolExecutor(max_workers=1)
    fix_lock = threading.Lock()
    applied_fixes: dict[tuple[str, str, int], dict] = {}

    app.state.store = store
    app.state.bus = bus
    app.state.gateway = gateway

    @app.get("/api/reports")
    def list_reports():
        return store.list()

    @app.get("/api/reports/{run_id}")
    def get_report(run_id: str):
        raw = store.get_raw(run_id)
        if raw is None:
            raise HTTPException(status_code=404, detail="unknown report id")
        return JSONResponse(raw)

    @app.get("/api/prompts/{prompt_id}")
    def get_prompt(prompt_id: str):
        for meta in store.list():
            report = store.get(meta["run_id"])
            entry = report.entry(prompt_id) if report else None
            if entry is not None:
                return JSONResponse(entry.to_dict())
        raise HTTPException(status_code=404, detail="unknown prompt id")

    def _analyze(body: AnalyzeBody) -> dict:
        if gateway is None:
            raise HTTPException(status_code=503, detail="no model gateway configured")
        bus.publish({"stage": "start", "detail": "analysis queued", "pct": 0})
        text = body.prompt_text
        sp = SourcePrompt.create("<adhoc>", (0, max(1, len(text.encode("utf-8")))), text, "generic-template")
        cp = canonicalize(sp)
        patch_set = None
        if cp.holes:
            bus.publish({"stage": "patching", "detail": "generating hole values", "pct": 10})
            patch_set = generate_patch(gateway, bank, cp, "sequential")
        result: dict = {
            "prompt_id": sp.id,
            "text": cp.text,
            "holes": list(cp.hole_names),
            "bias": [],
            "injection": None,
            "partial": False,
        }
        try:
            if "bias" in body.checks:
                for i, bias_type in enumerate(BIAS_TYPES):
                    bus.publish({"stage": f"bias:{bias_type}", "detail": "detecting", "pct": 20 + 20 * i})
                    finding = bias_mod.detect_bias(gateway, bank, cp, patch_set, bias_type)
                    entry = finding.to_dict()
                    entry["rewrites"] = []
                    entry["partial"] = False
                    if finding.flagged:
                        repair = bias_mod.debias(gateway, bank, cp, finding, patch_set)
                        entry["rewrites"] = [c.to_dict() for c in repair.candidates]
                        entry["partial"] = repair.partial
                    result["bias"].append(entry)
            if "injection" in body.checks and cp.holes:
                bus.publish({"stage": "injection", "detail": f"{len(attacks)} attacks", "pct": 80})
                report = injection_mod.test_vulnerability(
                    gateway, cp, attacks, patch_values=patch_set.values if patch_set else {}, bank=bank
                )
                entry = report.to_dict()
                entry["hardened"] = None
                if report.vulnerable:
                    try:
                        hardened = injection_mod.harden(
                            gateway, bank, cp, report, attacks,
                            patch_values=patch_set.values if patch_set else {},
                        )
                        entry["hardened"] = hardened.to_dict()
                    except Exhausted:
                        pass
                result["injection"] = entry
        except BudgetExceeded:
            result["partial"] = True
        bus.publish({"stage": "done", "detail": "analysis complete", "pct": 100})
        return result

    @app.post("/api/analyze")
    def analyze(body: AnalyzeBody):
        future = worker.submit(_analyze, body)
        return JSONResponse(future.result())

    @app.post("/api/fixes")
    def post_fix(body: FixBody):
        reports = [store.get(m["run_id"]) for m in store.list()]
        if body.report_id:
            reports = [store.get(body.report_id)]
        target = None
        for report in reports:
            if report is None:
                continue
            entry = report.entry(body.prompt_id)
            if entry is not None:
                target = (report, entry)
                break
        if target is None:
            raise HTTPException(status_code=404, detail="unknown prompt id")
        report, entry = target
        rewrites = _collect_rewrites(entry, body.kind)
        if not 0 <= body.rewrite_index < len(rewrites):
            raise HTTPException(status_code=404, detail="rewrite index out of range")
        key = (report.run_id, body.prompt_id, body.rewrite_index)
        with fix_lock:
            if key in applied_fixes:
                raise HTTPException(status_code=409, detail="fix already applied")
            action = FixAction(
                prompt_id=body.prompt_id,
                chosen_rewrite=rewrites[body.rewrite_index]["text"],
                file=entry.record.file,
                span=entry.record.span,
                original_raw=entry.record.raw,
            )
            try:
                result = apply_fix(action)
            except OSError as exc:
                raise HTTPException(status_code=409, detail=f"cannot touch file: {exc}") from exc
            if result.status == "conflicted":
                raise HTTPException(status_code=409, detail="source file drifted; fix conflicted")
            applied_fixes[key] = result.to_dict()
            bus.publish({"stage": "fix", "detail": f"applied to {result.file}", "pct": 100})
            return JSONResponse(result.to_dict())

    @app.get("/api/events")
    def events(max_events: int = 0, timeout_s: float = 30.0):
        q = bus.subscribe()

        def stream():
            sent = 0
            try:
                while True:
                    try:
                        event = q.get(timeout=timeout_s)
                    except queue.Empty:
                        break
                    yield f"data: {json.dumps(event)}\n\n"
                    sent += 1
                    if max_events and sent >= max_events:
                        break
            finally:
                bus.unsubscribe(q)

        return StreamingResponse(stream(), media_type="text/event-stream")

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
