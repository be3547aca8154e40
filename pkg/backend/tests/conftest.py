from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from modelbackend.config import BackendConfig
from modelbackend.service import create_app

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def corpus_path() -> Path:
    return FIXTURES / "corpus.jsonl"


@pytest.fixture(scope="session")
def client(corpus_path) -> TestClient:
    app = create_app(BackendConfig(corpus_path=str(corpus_path)))
    return TestClient(app, raise_server_exceptions=False)
