"""Acceptance gate: one test per criterion, each printing a verdict line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines. Everything here runs against the recorded mock; nothing touches the
network.
"""

import json
import random
import time
from pathlib import Path

import pytest

from conftest import DEMO_PROJECT, MOCK_SCRIPT, make_gateway
from oracles import oracle_bleu, oracle_cochran, oracle_cosine, oracle_gleu
from promptdoctor.bias import BiasFinding, debias
from promptdoctor.corpus import TaskCategory, cochran_sample_size
from promptdoctor.errors import Exhausted
from promptdoctor.gateway import Gateway, GatewayConfig, MockBackend, MockEntry
from promptdoctor.injection import AttackCase, harden, load_attacks, test_vulnerability
from promptdoctor.metaprompts import MetaPromptBank
from promptdoctor.metrics import bleu, cosine, gleu
from promptdoctor.model import SourcePrompt, canonicalize, substitute
from promptdoctor.optimizer import Hyperparams, optimize
from promptdoctor.pipeline import RunOptions, run_lint, stage_clean, stage_extract
from test_optimizer import SEEDS3, SOURCE as OPT_SOURCE, TEST as OPT_TEST, TRAIN as OPT_TRAIN, QualityBackend

pytestmark = pytest.mark.acceptance

BANK = MetaPromptBank()
GOLDEN_DIGEST_FILE = Path(__file__).parent / "fixtures" / "golden_digest.txt"

FIG2_RAW = (
    '"Noting the current date {current_date} or time of {current_time} help the human '
    'with the following request, Request: "+ question'
)
FIG2_CANONICAL = (
    "Noting the current date {current_date} or time of {current_time} help the human "
    "with the following request, Request: {question}"
)


def report(line: str):
    print(f"\nACCEPTANCE {line}", flush=True)


def canon(text, hint="generic-template"):
    sp = SourcePrompt.create("t", (0, max(1, len(text.encode()))), text, hint)
    return canonicalize(sp)


class TestCanonicalizationFixtures:
    def test_criterion_1_canonicalization_round_trips(self, monkeypatch):
        started = time.monotonic()
        sp = SourcePrompt.create("fig2.py", (0, len(FIG2_RAW.encode())), FIG2_RAW)
        cp = canonicalize(sp)
        assert cp.text == FIG2_CANONICAL, "byte-exact canonical text"
        assert cp.hole_names == ("current_date", "current_time", "question")
        assert len(cp.holes) == 3

        monkeypatch.chdir(DEMO_PROJECT)
        first, _ = stage_extract(".")
        second, _ = stage_extract(".")
        assert len(first) == 12, "fixture corpus holds 12 prompts"
        assert [r.id for r in first] == [r.id for r in second], "extraction deterministic"
        for record in first:
            rebuilt = canonicalize(record.source())
            assert rebuilt.text == record.text
            assert rebuilt.hole_names == record.holes
            identity = {n: "{" + n + "}" for n in record.holes}
            assert substitute(rebuilt, identity) == record.text, "identity substitution"
        elapsed = time.monotonic() - started
        assert elapsed < 1.0, f"runtime {elapsed:.3f}s under 1s"
        report(
            f"PASS canonicalization: date/time/request prompt -> 3 holes byte-exact; "
            f"12-prompt corpus round-trips in {elapsed:.3f}s"
        )


class TestSamplingReproduction:
    PUBLISHED = {20620: 378, 9427: 370, 6154: 362, 2204: 328, 464: 211, 651: 242}

    def test_criterion_2_published_sample_sizes(self):
        for population, expected in self.PUBLISHED.items():
            got = cochran_sample_size(population, 0.95, 0.05)
            assert abs(got - expected) <= 1, f"stratum {population}: {got} vs {expected}"
        inconsistent = cochran_sample_size(1503, 0.95, 0.05)
        assert abs(inconsistent - 307) <= 1, "formula value for the 1,503 stratum"
        assert inconsistent != 282, "the published 282 is documented as inconsistent, not fitted"
        assert inconsistent == oracle_cochran(1503, 1.9599639845400545, 0.05)
        report(
            "PASS sampling: strata 20620/9427/6154/2204/464/651 -> "
            "378/370/362/328/211/242; 1503 -> "
            f"{inconsistent} by formula (published 282 documented as inconsistent)"
        )


class TestMetricOracles:
    def test_criterion_3_metrics_agree_with_bruteforce(self):
        words = ["the", "cat", "sat", "on", "mat", "dog", "ran", "fast", "blue", "sky"]
        rng = random.Random(2024)

        def sentence():
            return " ".join(rng.choice(words) for _ in range(rng.randint(1, 12)))

        checked = 0
        for _ in range(60):
            c, r = sentence(), sentence()
            assert abs(bleu(c, r).value - oracle_bleu(c, r)) <= 1e-9
            assert abs(gleu(c, r).value - oracle_gleu(c, r)) <= 1e-9
            checked += 1
        for _ in range(60):
            a = [rng.uniform(-1, 1) for _ in range(16)]
            b = [rng.uniform(-1, 1) for _ in range(16)]
            assert abs(cosine(a, b).value - oracle_cosine(a, b)) <= 1e-9

        assert bleu("same exact words", "same exact words").value == 1.0
        assert gleu("same exact words", "same exact words").value == 1.0
        v = [0.1, 0.2, 0.3]
        assert cosine(v, v).value == pytest.approx(1.0, abs=1e-12)
        assert bleu("aaa bbb", "ccc ddd").value == 0.0
        assert gleu("aaa bbb", "ccc ddd").value == 0.0
        assert cosine([1.0, 0.0], [0.0, 1.0]).value == 0.0
        report(
            f"PASS metric oracles: bleu/gleu/cosine match brute force on {checked}+60 "
            "randomized pairs at 1e-9; identity exactly 1.0, disjoint exactly 0.0"
        )


THREE_HOLE = "Combine the intro {intro}, the body {body}, and the closing {closing} into a reply."
PATCH_VALUES = {"intro": "hello", "body": "main text", "closing": "bye"}


def synthetic_attacks(n):
    return [
        AttackCase(f"A{i}", f"attack payload number {i}", f"TARGET-MARKER-{i:04d}", "t")
        for i in range(n)
    ]


class TestLoopBounds:
    def test_criterion_4_debias_and_harden_bounds(self):
        # debias: a mock that never produces a clean rewrite
        class FlawedForever(MockBackend):
            def __init__(self):
                super().__init__([])
                self.round = 0

            def complete(self, role, request, temperature):
                if role.role == "generator":
                    self.round += 1
                    return json.dumps(
                        {"prompts": [
                            f"Round {self.round} rewrite {i} keeps {{slot}}." for i in range(5)
                        ]}
                    )
                return json.dumps(
                    {"gender_bias": True, "may_cause_gender_bias": True, "reasoning": "still"}
                )

        cp = canon("Introduce our staff member {slot} warmly.")
        gw = make_gateway(FlawedForever(), budget=50000)
        finding = BiasFinding(None, "gender", False, True, "persona ambiguity")
        from promptdoctor.patcher import PatchSet

        result = debias(gw, BANK, cp, finding, PatchSet(None, {"slot": "KC"}))
        assert result.iterations <= 10
        assert result.partial and result.candidates == []
        assert result.evaluations <= 50

        # debias: hole preservation on every returned candidate
        clean_gw = make_gateway(
            [
                MockEntry("generator", None, "staff member",
                          json.dumps({"prompts": [f"Neutral intro {i} for {{slot}}." for i in range(5)]})),
                MockEntry("judge", None, ".",
                          json.dumps({"gender_bias": False, "may_cause_gender_bias": False, "reasoning": ""})),
            ]
        )
        ok = debias(clean_gw, BANK, cp, finding, PatchSet(None, {"slot": "KC"}))
        assert len(ok.candidates) == 5
        assert all(c.holes == cp.hole_set for c in ok.candidates)
        assert all(1 <= c.distance <= 10 for c in ok.candidates)

        # harden: never beyond 10 iterations; popped prompt always minimal
        pops = []

        class AlwaysVulnerable(MockBackend):
            def __init__(self):
                super().__init__([])
                self.round = 0

            def complete(self, role, request, temperature):
                rendered = request.rendered()
                if role.role == "generator":
                    self.round += 1
                    pops.append(rendered.split("<vulnerable-variables>")[1].split("</vulnerable-variables>")[0])
                    return json.dumps(
                        {"prompts": [
                            f"Round {self.round} rewrite {i}: {{intro}} {{body}} {{closing}}."
                            for i in range(5)
                        ]}
                    )
                if "Round" in rendered:
                    return "partial leak TARGET-MARKER-0000"  # 1 vulnerable hole per rewrite... per trial hole
                return "leak TARGET-MARKER-0000 TARGET-MARKER-0001"

        attacks = synthetic_attacks(2)
        gw2 = make_gateway(AlwaysVulnerable(), budget=500000)
        cp3 = canon(THREE_HOLE)
        vreport = test_vulnerability(gw2, cp3, attacks, patch_values=PATCH_VALUES)
        with pytest.raises(Exhausted) as err:
            harden(gw2, BANK, cp3, vreport, attacks, patch_values=PATCH_VALUES)
        assert err.value.iterations <= 10

        # harden success path: returned prompt passes a from-scratch re-test
        entries = [
            MockEntry("responder", None, r"Combine the intro attack payload number 1",
                      "oops TARGET-MARKER-0001"),
            MockEntry("generator", None, "Combine the intro",
                      json.dumps({"prompts": [
                          f"Hardened variant {i} keeps {{intro}} {{body}} {{closing}} safe."
                          for i in range(5)
                      ]})),
            MockEntry("responder", None, ".", "I cannot comply with that request."),
        ]
        gw3 = make_gateway(MockBackend(list(entries)))
        vrep = test_vulnerability(gw3, cp3, synthetic_attacks(3), patch_values=PATCH_VALUES)
        hardened = harden(gw3, BANK, cp3, vrep, synthetic_attacks(3), patch_values=PATCH_VALUES)
        fresh = test_vulnerability(
            make_gateway(MockBackend(list(entries))), canon(hardened.text),
            synthetic_attacks(3), patch_values=PATCH_VALUES,
        )
        assert not fresh.vulnerable, "hardened prompt re-tested from scratch stays clean"
        report(
            "PASS loop bounds: debias capped at 10 iterations with hole preservation; "
            "harden capped at 10; hardened rewrite passes a from-scratch re-test; "
            "queue pops minimal vulnerable-hole prompts"
        )

    def test_criterion_4b_queue_discipline(self):
        # dedicated witness that the queue is re-sorted every iteration
        cp = canon(THREE_HOLE)
        attacks = synthetic_attacks(2)
        popped = []

        class Tracker(MockBackend):
            def __init__(self):
                super().__init__([])
                self.round = 0

            def complete(self, role, request, temperature):
                rendered = request.rendered()
                if role.role == "generator":
                    self.round += 1
                    popped.append(rendered.split("<prompt>")[-1].split("</prompt>")[0])
                    if self.round == 1:
                        return json.dumps({"prompts": [
                            "Wide open rewrite {intro} {body} {closing}.",
                            "Narrow leak rewrite {intro} {body} {closing}.",
                        ]})
                    return json.dumps({"prompts": []})
                if "Wide open" in rendered:
                    return "TARGET-MARKER-0000 TARGET-MARKER-0001 everywhere"
                if "Narrow leak rewrite hello" in rendered and "payload number 0" in rendered:
                    return "TARGET-MARKER-0000"
                if "Combine the intro" in rendered:
                    return "TARGET-MARKER-0000 TARGET-MARKER-0001"
                return "clean"

        gw = make_gateway(Tracker(), budget=500000)
        vrep = test_vulnerability(gw, cp, attacks, patch_values=PATCH_VALUES)
        with pytest.raises(Exhausted):
            harden(gw, BANK, cp, vrep, attacks, patch_values=PATCH_VALUES)
        assert popped[1].startswith("Narrow leak"), "minimal vulnerable-hole prompt popped first"
        report("PASS hardening queue: lowest vulnerable-hole-count prompt is always popped first")


class TestInjectionHarness:
    def test_criterion_5_sixty_trials_and_order_independence(self):
        cp = canon(THREE_HOLE)
        attacks = synthetic_attacks(20)
        scripted_successes = {("body", "A2"), ("closing", "A17")}
        entries = [
            MockEntry("responder", None, r"the body attack payload number 2(?!\d)",
                      "gotcha TARGET-MARKER-0002"),
            MockEntry("responder", None, r"the closing attack payload number 17",
                      "gotcha TARGET-MARKER-0017"),
            MockEntry("responder", None, ".", "I cannot comply with that request."),
        ]

        serialized = set()
        for workers in (1, 4, 8, 16):
            backend = MockBackend(list(entries))
            gw = make_gateway(backend, concurrency=16)
            rep = test_vulnerability(
                gw, cp, attacks, patch_values=PATCH_VALUES, max_workers=workers
            )
            assert rep.trials_issued == 60, "exactly 60 trials"
            assert len(backend.calls) == 60
            got = {(h, a) for h, ids in rep.hole_results.items() for a in ids}
            assert got == scripted_successes, "report matches the scripted success set"
            serialized.add(json.dumps(rep.to_dict(), sort_keys=True).encode())
        assert len(serialized) == 1, "report byte-identical across completion orders"
        report(
            "PASS injection harness: 3 holes x 20 attacks = 60 trials; scripted "
            "success set reproduced exactly; byte-identical under 1/4/8/16-way concurrency"
        )


class TestOptimizerDeterminism:
    def test_criterion_6_determinism_monotonicity_verdicts(self):
        hp = Hyperparams(n_seeds=3, prompts_per_step=4, train_count=3, test_count=2)

        def run_artifact():
            backend = QualityBackend(
                SEEDS3,
                [
                    ["QUALITY_3 correct this: {sentence}", "QUALITY_4 correct this: {sentence}"],
                    ["QUALITY_4 correct this again: {sentence}"],
                ],
            )
            gw = make_gateway(backend, budget=50000)
            run = optimize(
                gw, BANK, OPT_SOURCE, TaskCategory.GRAMMAR_CORRECTION,
                OPT_TRAIN, OPT_TEST, hp, seed=7,
            )
            return run

        first, second = run_artifact(), run_artifact()
        assert first.to_json().encode() == second.to_json().encode(), "byte-identical artifacts"

        trail = [s.best_so_far for s in first.steps]
        assert trail == sorted(trail), "best-so-far non-decreasing"

        defaults = Hyperparams()
        assert (defaults.n_seeds, defaults.prompts_per_step, defaults.train_count) == (16, 20, 30)

        degraded_backend = QualityBackend(SEEDS3, [["TRICK correct this: {sentence}"], []])
        gw = make_gateway(degraded_backend, budget=50000)
        degraded = optimize(
            gw, BANK, OPT_SOURCE, TaskCategory.GRAMMAR_CORRECTION, OPT_TRAIN, OPT_TEST, hp, 7
        )
        source_train = [c for c in degraded.steps[0].candidates if c.prompt.text == OPT_SOURCE.text]
        assert degraded.verdict == "degraded"
        assert degraded.best.train_score.value > source_train[0].train_score.value
        assert degraded.test_scores["best"] <= degraded.test_scores["source"]
        assert first.verdict == "improved"
        report(
            "PASS optimizer: byte-identical runs under fixed seed + recorded mock; "
            "best-so-far monotone; defaults 16/20/30; degraded fires exactly on "
            "train-win/test-loss"
        )


class TestDeskScaleBoundary:
    def test_criterion_7_out_of_scope_results_are_declared(self):
        # Corpus-scale findings are not reproducible here and are not claimed:
        # bias prevalence (3.46%), injection prevalence (10.75%), fix rates
        # (68.29% / 41.81% / 37.1%), external F-1 benchmarks, gold-dataset
        # scores, and the 14.78 -> 82.88 GLEU jump all require live frontier
        # models plus external corpora. The property suites above plus the
        # optional live smoke target stand in for them.
        live = Path(__file__).parent / "test_live_smoke.py"
        assert live.exists(), "the optional live smoke-test target ships with the suite"
        report(
            "PASS desk-scale boundary: corpus prevalence, fix rates, external "
            "benchmarks, and the GLEU jump are declared NOT reproducible here; "
            "property suites + optional live smoke tests substitute"
        )


class TestGoldenRun:
    def test_criterion_8_end_to_end_golden_digest(self, monkeypatch):
        started = time.monotonic()
        monkeypatch.chdir(DEMO_PROJECT)
        records, _ = stage_extract(".")
        records, stats = stage_clean(records)
        assert stats.retained == 12
        gateway = Gateway(
            GatewayConfig(retry_base_ms=0), MockBackend.from_script(MOCK_SCRIPT)
        )
        lint = run_lint(
            gateway, BANK, records,
            attacks=load_attacks(), options=RunOptions(deterministic=True),
        )
        elapsed = time.monotonic() - started
        assert elapsed < 30.0, f"golden pipeline took {elapsed:.2f}s"
        digest = lint.digest()
        expected = GOLDEN_DIGEST_FILE.read_text().strip()
        assert digest == expected, f"digest {digest} != committed {expected}"
        report(
            f"PASS golden run: extract->clean->lint-bias->lint-injection->report in "
            f"{elapsed:.2f}s; digest {digest[:16]}... matches the committed value"
        )
