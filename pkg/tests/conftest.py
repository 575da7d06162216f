import shutil
from pathlib import Path

import pytest

from promptdoctor.gateway import Gateway, GatewayConfig, MockBackend
from promptdoctor.metaprompts import MetaPromptBank

FIXTURES = Path(__file__).parent / "fixtures"
DEMO_PROJECT = FIXTURES / "demo_project"
MOCK_SCRIPT = FIXTURES / "mock_script.jsonl"


@pytest.fixture(scope="session")
def bank() -> MetaPromptBank:
    return MetaPromptBank()


@pytest.fixture
def scripted_gateway() -> Gateway:
    """Gateway over the committed golden mock script; retries never sleep."""
    config = GatewayConfig(retry_base_ms=0)
    return Gateway(config, MockBackend.from_script(MOCK_SCRIPT))


def make_gateway(entries, *, budget: int = 5000, concurrency: int = 8) -> Gateway:
    config = GatewayConfig(retry_base_ms=0, budget=budget, concurrency=concurrency)
    backend = entries if isinstance(entries, MockBackend) else MockBackend(entries)
    return Gateway(config, backend)


@pytest.fixture
def demo_project(tmp_path) -> Path:
    """A scratch copy of the fixture project, safe to patch in place."""
    dest = tmp_path / "demo_project"
    shutil.copytree(DEMO_PROJECT, dest)
    return dest
