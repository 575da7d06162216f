import json
import threading
import time

import pytest
from fastapi.testclient import TestClient

from conftest import MOCK_SCRIPT
from promptdoctor.gateway import Gateway, GatewayConfig, MockBackend
from promptdoctor.injection import load_attacks
from promptdoctor.metaprompts import MetaPromptBank
from promptdoctor.pipeline import RunOptions, run_lint, stage_clean, stage_extract
from promptdoctor.service import create_app

FIG1_TEXT = (
    "You are Pr. Vivian. Your style is conversational, and you always aim to get straight "
    "to the point. Use the following pieces of context to answer the users question. If you "
    "don't know the answer, just say that you don't know, don't try to make up an answer. "
    "Format the answers in a structured way using markdown. Include snippets from the context "
    "to illustrate your points. Always answer from the perspective of being Pr. Vivian.\n"
    "----------------\n"
    "{context}"
)


@pytest.fixture
def service(demo_project, tmp_path):
    records, _ = stage_extract(demo_project)
    records, _ = stage_clean(records)
    gateway = Gateway(GatewayConfig(retry_base_ms=0), MockBackend.from_script(MOCK_SCRIPT))
    report = run_lint(
        gateway, MetaPromptBank(), records,
        attacks=load_attacks(), options=RunOptions(deterministic=True),
    )
    store = tmp_path / "store"
    store.mkdir()
    (store / f"report-{report.run_id}.json").write_text(report.to_json() + "\n")

    fresh_gateway = Gateway(GatewayConfig(retry_base_ms=0), MockBackend.from_script(MOCK_SCRIPT))
    app = create_app(store_dir=store, gateway=fresh_gateway, bank=MetaPromptBank())
    client = TestClient(app)
    return client, report, store


class TestReportEndpoints:
    def test_list_reports(self, service):
        client, report, _ = service
        body = client.get("/api/reports").json()
        assert len(body) == 1
        assert body[0]["run_id"] == report.run_id
        assert body[0]["prompts"] == 12

    def test_get_report_matches_disk_artifact(self, service):
        client, report, store = service
        resp = client.get(f"/api/reports/{report.run_id}")
        assert resp.status_code == 200
        on_disk = json.loads((store / f"report-{report.run_id}.json").read_text())
        assert resp.json() == on_disk

    def test_two_gets_identical(self, service):
        client, report, _ = service
        a = client.get(f"/api/reports/{report.run_id}").content
        b = client.get(f"/api/reports/{report.run_id}").content
        assert a == b

    def test_unknown_report_404(self, service):
        client, _, _ = service
        assert client.get("/api/reports/nope").status_code == 404

    def test_get_prompt_by_id(self, service):
        client, report, _ = service
        pid = report.prompts[0].record.id
        body = client.get(f"/api/prompts/{pid}").json()
        assert body["record"]["id"] == pid

    def test_unknown_prompt_404(self, service):
        client, _, _ = service
        assert client.get("/api/prompts/zzz").status_code == 404


class TestAnalyze:
    def test_adhoc_injection_flags_the_context_hole(self, service):
        client, _, _ = service
        resp = client.post(
            "/api/analyze", json={"prompt_text": FIG1_TEXT, "checks": ["injection"]}
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["injection"]["vulnerable"] is True
        assert "context" in dict(body["injection"]["hole_results"])
        assert body["injection"]["hole_results"]["context"]
        assert body["injection"]["hardened"]

    def test_adhoc_bias_check(self, service):
        client, _, _ = service
        resp = client.post(
            "/api/analyze",
            json={"prompt_text": "You are a friendly secretary named KC.", "checks": ["bias"]},
        )
        body = resp.json()
        gender = [b for b in body["bias"] if b["bias_type"] == "gender"][0]
        assert gender["prone"] is True
        assert len(gender["rewrites"]) == 5

    def test_malformed_body_422(self, service):
        client, _, _ = service
        assert client.post("/api/analyze", json={"prompt_text": ""}).status_code == 422
        assert client.post("/api/analyze", json={"nope": 1}).status_code == 422


class TestFixes:
    def kc_prompt_id(self, report):
        for p in report.prompts:
            if "secretary named KC" in p.record.text:
                return p.record.id
        raise AssertionError("fixture prompt missing")

    def test_apply_patches_file_on_disk(self, service, demo_project):
        client, report, _ = service
        pid = self.kc_prompt_id(report)
        resp = client.post("/api/fixes", json={"prompt_id": pid, "rewrite_index": 0})
        assert resp.status_code == 200
        assert resp.json()["status"] == "applied"
        patched = (demo_project / "assistant_bot.py").read_text()
        assert "administrative assistant named KC" in patched
        assert 'persona_prompt = "You are a friendly secretary named KC."' not in patched

    def test_second_apply_conflicts_409(self, service):
        client, report, _ = service
        pid = self.kc_prompt_id(report)
        assert client.post("/api/fixes", json={"prompt_id": pid, "rewrite_index": 0}).status_code == 200
        assert client.post("/api/fixes", json={"prompt_id": pid, "rewrite_index": 0}).status_code == 409

    def test_drifted_file_conflicts_409(self, service, demo_project):
        client, report, _ = service
        pid = self.kc_prompt_id(report)
        path = demo_project / "assistant_bot.py"
        path.write_text(path.read_text().replace("friendly secretary", "cheerful secretary"))
        resp = client.post("/api/fixes", json={"prompt_id": pid, "rewrite_index": 0})
        assert resp.status_code == 409

    def test_unknown_prompt_404(self, service):
        client, _, _ = service
        assert client.post("/api/fixes", json={"prompt_id": "none", "rewrite_index": 0}).status_code == 404

    def test_rewrite_index_out_of_range_404(self, service):
        client, report, _ = service
        pid = self.kc_prompt_id(report)
        resp = client.post("/api/fixes", json={"prompt_id": pid, "rewrite_index": 99})
        assert resp.status_code == 404


class TestEvents:
    def test_streams_published_events(self, service):
        client, _, _ = service
        app = client.app

        def publish_soon():
            time.sleep(0.1)
            for i in range(3):
                app.state.bus.publish({"stage": f"s{i}", "pct": i * 50})

        threading.Thread(target=publish_soon, daemon=True).start()
        events = []
        with client.stream("GET", "/api/events?max_events=3&timeout_s=5") as resp:
            assert resp.headers["content-type"].startswith("text/event-stream")
            for line in resp.iter_lines():
                if line.startswith("data: "):
                    events.append(json.loads(line[len("data: "):]))
                if len(events) == 3:
                    break
        assert [e["stage"] for e in events] == ["s0", "s1", "s2"]

    def test_analyze_publishes_progress(self, service):
        client, _, _ = service
        app = client.app
        captured = []

        def run_analysis():
            time.sleep(0.1)
            client.post(
                "/api/analyze",
                json={"prompt_text": "You are a friendly secretary named KC.", "checks": ["bias"]},
            )

        threading.Thread(target=run_analysis, daemon=True).start()
        with client.stream("GET", "/api/events?max_events=6&timeout_s=5") as resp:
            for line in resp.iter_lines():
                if line.startswith("data: "):
                    captured.append(json.loads(line[len("data: "):]))
                if any(e["stage"] == "done" for e in captured):
                    break
        stages = [e["stage"] for e in captured]
        assert "start" in stages and "done" in stages
