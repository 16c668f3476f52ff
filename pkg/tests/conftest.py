from pathlib import Path

import pytest

from controlgen.providers import ReplayProvider
from controlgen.resources import load_catalog
from controlgen.retrieval import build_index, load_exemplars, load_snippets
from controlgen.store import RecordStore

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def repo_root() -> Path:
    return ROOT


@pytest.fixture(scope="session")
def catalog():
    return load_catalog(ROOT / "catalog" / "aws_desk_catalog.json")


@pytest.fixture(scope="session")
def index():
    return build_index(
        load_exemplars(ROOT / "corpus" / "exemplars.jsonl"),
        load_snippets(ROOT / "corpus" / "snippets.jsonl"),
    )


@pytest.fixture()
def replay_provider(repo_root):
    return ReplayProvider(repo_root / "fixtures" / "replay")


@pytest.fixture()
def store(tmp_path):
    return RecordStore(tmp_path / "store")
