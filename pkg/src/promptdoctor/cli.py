"""Command-line entry points.

Exit codes: 0 success, 1 findings present with --fail-on-findings,
2 configuration error, 3 I/O error, 4 model-call budget exceeded.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .corpus import TaskCategory, load_records, save_records
from .errors import BudgetExceeded, ConfigError, PromptDoctorError
from .gateway import Gateway, GatewayConfig, MockBackend
from .injection import load_attacks
from .metaprompts import MetaPromptBank
from .metrics import bleu, gleu
from .optimizer import Hyperparams, optimize
from .patcher import synthesize_dataset
from .pipeline import RunOptions, run_lint, stage_clean, stage_extract, stage_sample, write_stats
from .reports import LintReport
from .sourcefix import FixAction, apply_fix

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_BUDGET = 4


def _gateway(args) -> Gateway:
    config = GatewayConfig.from_file(args.config) if getattr(args, "config", None) else GatewayConfig()
    if getattr(args, "mock", None):
        config.retry_base_ms = 0
        return Gateway(config, MockBackend.from_script(args.mock))
    return Gateway(config)


def cmd_extract(args) -> int:
    records, diag = stage_extract(args.root, min_chars=args.min_chars)
    save_records(records, args.out)
    print(f"extracted {len(records)} prompts from {args.root}")
    print(
        f"strings seen: {diag.strings_seen}, skipped short: {diag.skipped_short}, "
        f"skipped non-prompt context: {diag.skipped_context}, unparseable: {diag.skipped_unparseable}"
    )
    return EXIT_OK


def cmd_corpus_clean(args) -> int:
    records = load_records(args.infile)
    kept, stats = stage_clean(records)
    save_records(kept, args.out)
    if args.stats:
        write_stats(stats, args.stats)
    print(f"kept {stats.retained}/{stats.total} prompts "
          f"(short: {stats.removed_short}, non-english: {stats.removed_non_english})")
    return EXIT_OK


def cmd_corpus_sample(args) -> int:
    records = load_records(args.infile)
    sampled = stage_sample(records, args.confidence, args.error, args.seed)
    save_records(sampled, args.out)
    print(f"sampled {len(sampled)}/{len(records)} prompts "
          f"({args.confidence:.0%} confidence, {args.error:.0%} error, seed {args.seed})")
    return EXIT_OK


def _finish_lint(args, report: LintReport) -> int:
    report.save(args.out)
    print(report.summary())
    print(f"report written to {args.out} (digest {report.digest()[:16]})")
    if args.fail_on_findings and report.finding_count > 0:
        return EXIT_FINDINGS
    return EXIT_OK


def cmd_lint(args) -> int:
    records = load_records(args.prompts)
    gateway = _gateway(args)
    bank = MetaPromptBank()
    checks = ("bias", "injection") if args.what == "all" else (args.what,)
    attacks = load_attacks(args.attacks) if "injection" in checks else None
    options = RunOptions(checks=checks, deterministic=args.deterministic)
    report = run_lint(gateway, bank, records, attacks=attacks, options=options)
    return _finish_lint(args, report)


def cmd_run(args) -> int:
    records, _diag = stage_extract(args.root, min_chars=args.min_chars)
    records, stats = stage_clean(records)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_records(records, out_dir / "corpus.jsonl")
    write_stats(stats, out_dir / "stats.json")
    gateway = _gateway(args)
    bank = MetaPromptBank()
    attacks = load_attacks(args.attacks)
    options = RunOptions(deterministic=args.deterministic)
    report = run_lint(gateway, bank, records, attacks=attacks, options=options)
    args.out = out_dir / "report.json"
    return _finish_lint(args, report)


def cmd_optimize(args) -> int:
    records = load_records(args.prompts)
    by_id = {r.id: r for r in records}
    if args.prompt_id not in by_id:
        raise ConfigError(f"prompt id {args.prompt_id!r} not found in {args.prompts}")
    source = by_id[args.prompt_id].canonical()
    category = TaskCategory(args.category)
    gateway = _gateway(args)
    bank = MetaPromptBank()
    hp = Hyperparams(
        n_seeds=args.seeds,
        prompts_per_step=args.per_step,
        train_count=args.train,
        test_count=args.test,
    )
    train, test = synthesize_dataset(
        gateway, bank, source, category, hp.train_count, hp.test_count, args.seed
    )
    run = optimize(gateway, bank, source, category, train, test, hp, args.seed)
    Path(args.out).write_text(run.to_json() + "\n", encoding="utf-8")
    scores = run.test_scores
    print(f"verdict: {run.verdict} (train best {run.best.train_score.value:.4f}, "
          f"test source {scores['source']}, test best {scores['best']})")
    print(f"run written to {args.out}")
    return EXIT_OK


def cmd_report(args) -> int:
    report = LintReport.load(args.infile)
    if args.digest:
        print(report.digest())
    else:
        print(report.summary())
    return EXIT_OK


def cmd_score(args) -> int:
    if args.metric == "bleu":
        score = bleu(args.candidate, args.reference)
    elif args.metric == "gleu":
        score = gleu(args.candidate, args.reference)
    else:
        raise ConfigError(f"unknown metric {args.metric!r}")
    print(f"{score.metric}: {score.value:.9f}")
    return EXIT_OK


def cmd_apply_fix(args) -> int:
    report = LintReport.load(args.report)
    entry = report.entry(args.prompt_id)
    if entry is None:
        raise ConfigError(f"prompt id {args.prompt_id!r} not in report")
    rewrites = []
    if args.kind == "bias":
        for b in entry.bias:
            rewrites.extend(b.get("rewrites", []))
    else:
        if entry.injection and entry.injection.get("hardened"):
            rewrites = [entry.injection["hardened"]]
    if not 0 <= args.rewrite_index < len(rewrites):
        raise ConfigError(f"rewrite index {args.rewrite_index} out of range (have {len(rewrites)})")
    action = FixAction(
        prompt_id=entry.record.id,
        chosen_rewrite=rewrites[args.rewrite_index]["text"],
        file=entry.record.file,
        span=entry.record.span,
        original_raw=entry.record.raw,
    )
    result = apply_fix(action)
    print(f"fix for {args.prompt_id}: {result.status}")
    return EXIT_OK if result.status == "applied" else EXIT_FINDINGS


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    gateway = _gateway(args)
    app = create_app(
        store_dir=args.store,
        gateway=gateway,
        bank=MetaPromptBank(),
        attacks_path=args.attacks,
        ui_dir=args.ui,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="promptdoctor", description="Lint and repair LLM prompts embedded in source code")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract prompts from a source tree")
    p.add_argument("--root", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-chars", type=int, default=None)
    p.set_defaults(func=cmd_extract)

    corpus = sub.add_parser("corpus", help="corpus cleaning and sampling")
    corpus_sub = corpus.add_subparsers(dest="subcommand", required=True)
    p = corpus_sub.add_parser("clean")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--stats", default=None)
    p.set_defaults(func=cmd_corpus_clean)
    p = corpus_sub.add_parser("sample")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--error", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_corpus_sample)

    lint = sub.add_parser("lint", help="run bias/injection checks over a corpus")
    lint_sub = lint.add_subparsers(dest="what_cmd", required=True)
    for what in ("bias", "injection", "all"):
        p = lint_sub.add_parser(what)
        p.add_argument("--prompts", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--attacks", default=None)
        p.add_argument("--config", default=None)
        p.add_argument("--mock", default=None)
        p.add_argument("--deterministic", action="store_true")
        p.add_argument("--fail-on-findings", action="store_true")
        p.set_defaults(func=cmd_lint, what=what)

    p = sub.add_parser("run", help="full pipeline: extract, clean, lint, report")
    p.add_argument("--root", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--attacks", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--mock", default=None)
    p.add_argument("--min-chars", type=int, default=None)
    p.add_argument("--deterministic", action="store_true")
    p.add_argument("--fail-on-findings", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("optimize", help="optimize one prompt against synthetic data")
    p.add_argument("--prompts", required=True)
    p.add_argument("--prompt-id", required=True)
    p.add_argument("--category", required=True, choices=[c.value for c in TaskCategory])
    p.add_argument("--seeds", type=int, default=16)
    p.add_argument("--per-step", type=int, default=20)
    p.add_argument("--train", type=int, default=30)
    p.add_argument("--test", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--mock", default=None)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("report", help="inspect a stored report")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--digest", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("score", help="debug a similarity metric")
    p.add_argument("--metric", required=True, choices=["bleu", "gleu"])
    p.add_argument("--candidate", required=True)
    p.add_argument("--reference", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("apply-fix", help="apply a rewrite from a report to its source file")
    p.add_argument("--report", required=True)
    p.add_argument("--prompt-id", required=True)
    p.add_argument("--rewrite-index", type=int, default=0)
    p.add_argument("--kind", choices=["bias", "injection"], default="bias")
    p.set_defaults(func=cmd_apply_fix)

    p = sub.add_parser("serve", help="serve the review API and UI")
    p.add_argument("--store", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--attacks", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--mock", default=None)
    p.add_argument("--ui", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PromptDoctorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
