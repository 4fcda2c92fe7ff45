from pathlib import Path

import pytest

from src.corpus import load_corpus, load_lexicon, load_relation_snapshot
from src.utils.pipeline import discover_lanet

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "data" / "roorkee-mini"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def mini_corpus():
    return load_corpus(str(FIXTURE_DIR / "corpus.jsonl"))


@pytest.fixture(scope="session")
def mini_snapshot():
    return load_relation_snapshot(str(FIXTURE_DIR / "conceptnet.tsv"))


@pytest.fixture(scope="session")
def mini_lexicon():
    return load_lexicon(str(FIXTURE_DIR / "lexicon.tsv"))


@pytest.fixture(scope="session")
def mini_build(mini_corpus, mini_snapshot, mini_lexicon):
    return discover_lanet(mini_corpus, mini_snapshot, mini_lexicon)


@pytest.fixture(scope="session")
def mini_graph(mini_build):
    return mini_build.graph


@pytest.fixture(autouse=True)
def no_log_file(monkeypatch):
    monkeypatch.setenv("LANET_LOG_DIR", "")
