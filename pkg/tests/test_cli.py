import json

import pytest

from conftest import MOCK_SCRIPT
from promptdoctor.cli import main
from promptdoctor.corpus import load_records
from promptdoctor.reports import LintReport


def run(*argv) -> int:
    return main([str(a) for a in argv])


@pytest.fixture
def corpus_file(demo_project, tmp_path):
    out = tmp_path / "corpus.jsonl"
    assert run("extract", "--root", demo_project, "--out", out) == 0
    return out


class TestExtractAndCorpus:
    def test_extract_writes_records(self, corpus_file):
        records = load_records(corpus_file)
        assert len(records) == 12

    def test_extract_empty_directory(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        out = tmp_path / "corpus.jsonl"
        assert run("extract", "--root", empty, "--out", out) == 0
        assert load_records(out) == []

    def test_clean_stage(self, corpus_file, tmp_path):
        cleaned = tmp_path / "cleaned.jsonl"
        stats = tmp_path / "stats.json"
        assert run(
            "corpus", "clean", "--in", corpus_file, "--out", cleaned, "--stats", stats
        ) == 0
        data = json.loads(stats.read_text())
        assert data["total"] == 12
        assert data["retained"] == data["total"] - data["removed_short"] - data["removed_non_english"]

    def test_sample_stage_deterministic(self, corpus_file, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        assert run("corpus", "sample", "--in", corpus_file, "--out", a,
                   "--confidence", "0.95", "--error", "0.05", "--seed", "3") == 0
        assert run("corpus", "sample", "--in", corpus_file, "--out", b,
                   "--confidence", "0.95", "--error", "0.05", "--seed", "3") == 0
        assert a.read_bytes() == b.read_bytes()


class TestLint:
    def test_lint_bias_flags_fixture_and_exit_codes(self, corpus_file, tmp_path):
        report_path = tmp_path / "report.json"
        code = run(
            "lint", "bias", "--prompts", corpus_file, "--out", report_path,
            "--mock", MOCK_SCRIPT, "--deterministic",
        )
        assert code == 0
        report = LintReport.load(report_path)
        kc = [p for p in report.prompts if "secretary named KC" in p.record.text][0]
        gender = [b for b in kc.bias if b["bias_type"] == "gender"][0]
        assert gender["prone"] is True
        assert len(gender["rewrites"]) == 5

    def test_fail_on_findings_exit_one(self, corpus_file, tmp_path):
        code = run(
            "lint", "bias", "--prompts", corpus_file, "--out", tmp_path / "r.json",
            "--mock", MOCK_SCRIPT, "--deterministic", "--fail-on-findings",
        )
        assert code == 1

    def test_lint_injection(self, corpus_file, tmp_path):
        report_path = tmp_path / "report.json"
        code = run(
            "lint", "injection", "--prompts", corpus_file, "--out", report_path,
            "--mock", MOCK_SCRIPT, "--deterministic",
        )
        assert code == 0
        report = LintReport.load(report_path)
        vulnerable = [p for p in report.prompts if p.injection and p.injection["vulnerable"]]
        assert len(vulnerable) == 2

    def test_missing_input_is_io_error(self, tmp_path):
        code = run("lint", "bias", "--prompts", tmp_path / "absent.jsonl",
                   "--out", tmp_path / "r.json", "--mock", MOCK_SCRIPT)
        assert code == 3


class TestReportAndScore:
    def test_report_digest_output(self, corpus_file, tmp_path, capsys):
        report_path = tmp_path / "report.json"
        run("lint", "bias", "--prompts", corpus_file, "--out", report_path,
            "--mock", MOCK_SCRIPT, "--deterministic")
        capsys.readouterr()
        assert run("report", "--in", report_path, "--digest") == 0
        digest = capsys.readouterr().out.strip()
        assert digest == LintReport.load(report_path).digest()

    def test_score_command(self, capsys):
        assert run("score", "--metric", "bleu",
                   "--candidate", "the cat sat on the mat",
                   "--reference", "the cat is on the mat") == 0
        out = capsys.readouterr().out
        assert out.strip() == "bleu: 0.485491772"  # 0.48549177170... at 9 places

    def test_unknown_prompt_id_is_config_error(self, corpus_file, tmp_path):
        code = run("optimize", "--prompts", corpus_file, "--prompt-id", "nope",
                   "--category", "qa", "--out", tmp_path / "o.json", "--mock", MOCK_SCRIPT)
        assert code == 2


class TestApplyFixCommand:
    def test_apply_bias_fix(self, demo_project, tmp_path, corpus_file):
        report_path = tmp_path / "report.json"
        run("lint", "bias", "--prompts", corpus_file, "--out", report_path,
            "--mock", MOCK_SCRIPT, "--deterministic")
        report = LintReport.load(report_path)
        kc = [p for p in report.prompts if "secretary named KC" in p.record.text][0]
        code = run("apply-fix", "--report", report_path, "--prompt-id", kc.record.id,
                   "--rewrite-index", "0", "--kind", "bias")
        assert code == 0
        assert "administrative assistant named KC" in (demo_project / "assistant_bot.py").read_text()


class TestFullRun:
    def test_run_pipeline_writes_artifacts(self, demo_project, tmp_path):
        out_dir = tmp_path / "artifacts"
        code = run("run", "--root", demo_project, "--out-dir", out_dir,
                   "--mock", MOCK_SCRIPT, "--deterministic")
        assert code == 0
        assert (out_dir / "corpus.jsonl").exists()
        assert (out_dir / "stats.json").exists()
        report = LintReport.load(out_dir / "report.json")
        assert len(report.prompts) == 12
