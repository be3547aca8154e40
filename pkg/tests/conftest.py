import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fnrelease import SPLIT_CONFIG, write_mini_release

from framegen.expand import CandidateSelector
from framegen.release import load_release
from framegen.relations import RelationGraph


@pytest.fixture(scope="session")
def mini_release(tmp_path_factory) -> Path:
    return write_mini_release(tmp_path_factory.mktemp("fn"))


@pytest.fixture(scope="session")
def split_config_path(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("cfg") / "splits.json"
    path.write_text(json.dumps(SPLIT_CONFIG), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def loaded(mini_release, split_config_path):
    return load_release(mini_release, split_config_path)


@pytest.fixture(scope="session")
def lexicon(loaded):
    return loaded[0]


@pytest.fixture(scope="session")
def corpus(loaded):
    return loaded[1]


@pytest.fixture(scope="session")
def graph(lexicon):
    return RelationGraph(lexicon)


@pytest.fixture(scope="session")
def selector(lexicon, graph):
    return CandidateSelector(lexicon, graph)
