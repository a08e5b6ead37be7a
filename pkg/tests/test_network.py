import json
import math

import numpy as np
import pytest

from spic_server.config.config import Tolerances
from spic_server.core.network.network import (
    ancestral_closure,
    dumps_network,
    parse_network,
    serialize_network,
    skeleton_distances,
    topological_order,
)
from spic_server.core.oracle.generator import random_network
from spic_server.errors import (
    CovarianceError,
    CycleError,
    DanglingRef,
    DocumentSyntaxError,
    ShapeError,
    UnknownNode,
)

from conftest import DESK_DOCUMENT, SPLIT_DOCUMENT, document


def test_desk_network_parses(desk):
    assert len(desk) == 4
    assert desk.total_dim == 4
    assert topological_order(desk) == ("a1", "a2", "c1", "c2")
    assert desk.parents("c2") == ("c1", "a2")
    assert desk.arcs == (("a1", "c1"), ("a2", "c2"), ("c1", "c2"))


def test_single_node_network():
    net = parse_network({"nodes": [{"id": "a1", "dim": 1, "mean": [1], "cov": [[1]]}]})
    assert topological_order(net) == ("a1",)
    assert skeleton_distances(net) == {"a1": 0}


def test_chain_order_follows_arcs_not_names():
    net = parse_network({"nodes": [
        {"id": "z", "dim": 1, "mean": [0], "cov": [[1]], "parents": [{"id": "y", "B": [[1]]}]},
        {"id": "y", "dim": 1, "mean": [0], "cov": [[1]], "parents": [{"id": "x", "B": [[1]]}]},
        {"id": "x", "dim": 1, "mean": [0], "cov": [[1]]},
    ]})
    assert topological_order(net) == ("x", "y", "z")


def test_accepts_json_text_and_bytes():
    text = json.dumps(DESK_DOCUMENT)
    assert topological_order(parse_network(text)) == topological_order(parse_network(text.encode()))


@pytest.mark.parametrize(
    "doc, error",
    [
        (document(DESK_DOCUMENT, c1={"parents": [{"id": "zz", "B": [[1.0]]}]}), DanglingRef),
        (document(DESK_DOCUMENT, a1={"parents": [{"id": "c2", "B": [[1.0]]}]}), CycleError),
        (document(DESK_DOCUMENT, a1={"parents": [{"id": "a1", "B": [[1.0]]}]}), CycleError),
        (document(DESK_DOCUMENT, a1={"cov": [[-1.0]]}), CovarianceError),
        (document(DESK_DOCUMENT, a1={"mean": [1.0, 2.0]}), ShapeError),
        (document(DESK_DOCUMENT, c1={"parents": [{"id": "a1", "B": [[2.0, 1.0]]}]}), ShapeError),
        (document(DESK_DOCUMENT, a1={"dim": "one"}), DocumentSyntaxError),
        (document(DESK_DOCUMENT, a1={"mean": [float("nan")]}), DocumentSyntaxError),
        (document(DESK_DOCUMENT, c1={"parents": [{"id": "a1", "B": [[float("inf")]]}]}), DocumentSyntaxError),
        (document(DESK_DOCUMENT, a2={"cov": [[float("nan")]]}), DocumentSyntaxError),
        ("{\"nodes\": [{\"id\": \"a\", \"dim\": 1, \"mean\": [NaN], \"cov\": [[1]]}]}", DocumentSyntaxError),
        ({"vertices": []}, DocumentSyntaxError),
        ("{not json", DocumentSyntaxError),
    ],
)
def test_invalid_documents(doc, error):
    with pytest.raises(error):
        parse_network(doc)


def test_asymmetric_covariance_is_rejected():
    doc = {"nodes": [{"id": "a", "dim": 2, "mean": [0, 0], "cov": [[1.0, 0.5], [0.4, 1.0]]}]}
    with pytest.raises(CovarianceError):
        parse_network(doc)


def test_covariance_tolerance_is_configurable():
    doc = {"nodes": [{"id": "a", "dim": 2, "mean": [0, 0], "cov": [[1.0, 0.5], [0.5 + 1e-7, 1.0]]}]}
    with pytest.raises(CovarianceError):
        parse_network(doc)
    net = parse_network(doc, Tolerances(symmetry=1e-6))
    assert net.dim("a") == 2


def test_duplicate_ids_and_parents():
    doc = {"nodes": [{"id": "a", "dim": 1, "mean": [0], "cov": [[1]]}] * 2}
    with pytest.raises(DocumentSyntaxError):
        parse_network(doc)
    doc = document(DESK_DOCUMENT, c1={"parents": [{"id": "a1", "B": [[1.0]]}, {"id": "a1", "B": [[1.0]]}]})
    with pytest.raises(DocumentSyntaxError):
        parse_network(doc)


def test_singular_noise_is_allowed():
    net = parse_network(document(DESK_DOCUMENT, c1={"cov": [[0.0]]}))
    assert net.node("c1").noise_cov[0, 0] == 0.0


def test_ancestral_closure(desk):
    assert ancestral_closure(desk, {"a1", "c2"}) == {"a1", "a2", "c1", "c2"}
    assert ancestral_closure(desk, {"a1"}) == {"a1"}
    assert ancestral_closure(desk, set()) == frozenset()
    with pytest.raises(UnknownNode):
        ancestral_closure(desk, {"nope"})


def test_ancestral_closure_is_idempotent():
    net = random_network(3, 10)
    for v in net.order:
        once = ancestral_closure(net, {v})
        assert ancestral_closure(net, once) == once
        assert all(set(net.parents(u)) <= once for u in once)


def test_skeleton_distances(desk, split):
    assert skeleton_distances(desk) == {"a1": 3, "c1": 2, "c2": 2, "a2": 3}
    assert all(math.isinf(e) for e in skeleton_distances(split).values())
    assert skeleton_distances(split, {"x", "y"}) == {"x": 1, "y": 1}


@pytest.mark.parametrize("seed", range(10))
def test_eccentricity_bounds(seed):
    net = random_network(seed, 9, max_parents=2)
    comp = max(net.components(), key=len)
    ecc = skeleton_distances(net, comp)
    diameter = max(ecc.values())
    assert min(ecc.values()) >= math.ceil(diameter / 2)


@pytest.mark.parametrize("seed", range(20))
def test_topological_order_respects_arcs(seed):
    net = random_network(seed, 12)
    order = topological_order(net)
    assert sorted(order) == sorted(net.nodes)
    index = {v: i for i, v in enumerate(order)}
    assert all(index[u] < index[v] for u, v in net.arcs)


@pytest.mark.parametrize("seed", range(10))
def test_serialize_round_trip_is_exact(seed):
    net = random_network(seed, 8)
    again = parse_network(dumps_network(net))
    assert serialize_network(again) == serialize_network(net)
    for v in net.order:
        assert np.array_equal(again.node(v).noise_cov, net.node(v).noise_cov)
        for p, q in zip(again.node(v).parents, net.node(v).parents):
            assert np.array_equal(p.link, q.link)


def test_components_and_domain(split, desk):
    assert split.components() == (frozenset({"x", "y"}), frozenset({"z"}))
    assert desk.domain({"c2"}) == {"c2", "c1", "a2"}
    assert desk.domain(set()) == frozenset()


def test_split_document_round_trip():
    net = parse_network(SPLIT_DOCUMENT)
    assert serialize_network(net)["nodes"][2]["cov"] == [[2.0, 0.5], [0.5, 1.0]]
