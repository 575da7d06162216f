"""Lint, red-team, repair, and optimize LLM prompts embedded in source code."""

from .bias import BiasFinding, DebiasResult, RewriteCandidate, debias, detect_bias
from .corpus import CorpusStats, TaskCategory, categorize, clean, stratified_sample
from .extraction import ExtractionDiagnostics, extract_prompts
from .gateway import (
    ChatRequest,
    ChatResponse,
    Gateway,
    GatewayConfig,
    MockBackend,
    ModelRole,
    mock_gateway,
)
from .injection import AttackCase, VulnerabilityReport, harden, load_attacks, test_vulnerability
from .metaprompts import MetaPromptBank
from .metrics import Score, bleu, cosine, gleu
from .model import (
    CanonicalPrompt,
    Hole,
    PromptRecord,
    SourcePrompt,
    canonicalize,
    hole_count,
    partial_substitute,
    substitute,
)
from .optimizer import Hyperparams, OptimizationRun, ScoredPrompt, evaluate, generate_seeds, make_judge_prompt, optimize
from .patcher import DatasetRow, PatchSet, SyntheticDataset, patch, synthesize_dataset
from .principles import PRINCIPLES, SeedPrinciple
from .reports import LintReport, PromptEntry
from .sourcefix import FixAction, apply_fix

__version__ = "0.1.0"
