import copy
import json

import pytest

from spic_server.core.network.network import parse_network
from spic_server.core.query.session import Session

# a1, a2 roots; c1 = 2 a1 + w; c2 = c1 + 3 a2 + w
DESK_DOCUMENT = {
    "nodes": [
        {"id": "a1", "dim": 1, "mean": [1.0], "cov": [[1.0]]},
        {"id": "a2", "dim": 1, "mean": [0.0], "cov": [[2.0]]},
        {"id": "c1", "dim": 1, "mean": [0.0], "cov": [[0.5]], "parents": [{"id": "a1", "B": [[2.0]]}]},
        {
            "id": "c2", "dim": 1, "mean": [0.0], "cov": [[1.0]],
            "parents": [{"id": "c1", "B": [[1.0]]}, {"id": "a2", "B": [[3.0]]}],
        },
    ]
}

DIAMOND_DOCUMENT = {
    "nodes": [
        {"id": "a", "dim": 1, "mean": [0.0], "cov": [[1.0]]},
        {"id": "b", "dim": 1, "mean": [1.0], "cov": [[1.0]], "parents": [{"id": "a", "B": [[1.0]]}]},
        {"id": "c", "dim": 1, "mean": [-1.0], "cov": [[1.0]], "parents": [{"id": "a", "B": [[2.0]]}]},
        {
            "id": "d", "dim": 1, "mean": [0.0], "cov": [[1.0]],
            "parents": [{"id": "b", "B": [[1.0]]}, {"id": "c", "B": [[1.0]]}],
        },
    ]
}

# two disconnected pieces: x -> y and an isolated 2-dimensional z
SPLIT_DOCUMENT = {
    "nodes": [
        {"id": "x", "dim": 1, "mean": [1.0], "cov": [[1.0]]},
        {"id": "y", "dim": 1, "mean": [0.0], "cov": [[1.0]], "parents": [{"id": "x", "B": [[1.0]]}]},
        {"id": "z", "dim": 2, "mean": [0.0, 1.0], "cov": [[2.0, 0.5], [0.5, 1.0]]},
    ]
}


def document(base: dict, **changes) -> dict:
    """Deep copy of a document; ``changes`` patch node entries by id."""
    doc = copy.deepcopy(base)
    for node in doc["nodes"]:
        if node["id"] in changes:
            node.update(changes[node["id"]])
    return doc


@pytest.fixture
def desk_document():
    return copy.deepcopy(DESK_DOCUMENT)


@pytest.fixture
def desk():
    return parse_network(DESK_DOCUMENT)


@pytest.fixture
def diamond():
    return parse_network(DIAMOND_DOCUMENT)


@pytest.fixture
def split():
    return parse_network(SPLIT_DOCUMENT)


@pytest.fixture
def desk_session(desk):
    return Session(desk, fast_path=True)


@pytest.fixture
def desk_file(tmp_path):
    path = tmp_path / "desk.json"
    path.write_text(json.dumps(DESK_DOCUMENT))
    return str(path)
