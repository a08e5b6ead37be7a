import json
import logging
import math
from types import MappingProxyType
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple, Union

import fastjsonschema
import networkx as nx
import numpy as np
from attr import dataclass

from ..gaussian.utils import check_covariance, frozen
from ...config.config import DEFAULT_TOLERANCES, Tolerances
from ...consts import consts
from ...errors import CycleError, DanglingRef, DocumentSyntaxError, ShapeError, UnknownNode

logger = logging.getLogger(consts.LOGGER_NAME)

Document = Union[str, bytes, Mapping[str, Any]]

NETWORK_SCHEMA = {
    "type": "object",
    "properties": {
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "dim": {"type": "integer", "minimum": 1},
                    "mean": {"type": "array", "items": {"type": "number"}},
                    "cov": {
                        "type": "array",
                        "items": {"type": "array", "items": {"type": "number"}},
                    },
                    "parents": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "properties": {
                                "id": {"type": "string", "minLength": 1},
                                "B": {
                                    "type": "array",
                                    "items": {"type": "array", "items": {"type": "number"}},
                                },
                            },
                            "required": ["id", "B"],
                        },
                    },
                },
                "required": ["id", "dim", "mean", "cov"],
            },
        },
    },
    "required": ["nodes"],
}

_validate_document = fastjsonschema.compile(NETWORK_SCHEMA)


@dataclass(frozen=True, eq=False)
class ParentLink:
    id: str
    link: np.ndarray  # dim x parent_dim


@dataclass(frozen=True, eq=False)
class NodeSpec:
    """
    One network variable-vector: x = sum_i B_i x_i^p + w_x, w_x ~ N(mean, noise_cov).
    """

    id: str
    dim: int
    mean: np.ndarray
    noise_cov: np.ndarray
    parents: Tuple[ParentLink, ...] = ()

    @property
    def parent_ids(self) -> Tuple[str, ...]:
        return tuple(p.id for p in self.parents)


class Network:
    """
    Validated DAG of NodeSpecs. Immutable once built; safe to share between readers.
    """

    def __init__(self, nodes: Iterable[NodeSpec], tol: Tolerances = DEFAULT_TOLERANCES):
        table: Dict[str, NodeSpec] = {}
        for node in nodes:
            if node.id in table:
                raise DocumentSyntaxError(f"duplicate node id {node.id!r}")
            table[node.id] = node
        self.nodes: Mapping[str, NodeSpec] = MappingProxyType(table)

        graph = nx.DiGraph()
        graph.add_nodes_from(table)
        for node in table.values():
            seen = set()
            for parent in node.parents:
                if parent.id == node.id:
                    raise CycleError(f"node {node.id!r} lists itself as a parent")
                if parent.id in seen:
                    raise DocumentSyntaxError(f"node {node.id!r} lists parent {parent.id!r} twice")
                seen.add(parent.id)
                if parent.id not in table:
                    raise DanglingRef(f"node {node.id!r} references unknown parent {parent.id!r}")
                expected = (node.dim, table[parent.id].dim)
                if parent.link.shape != expected:
                    raise ShapeError(
                        f"link {parent.id!r} -> {node.id!r} has shape {parent.link.shape}, expected {expected}"
                    )
                graph.add_edge(parent.id, node.id)

        if not nx.is_directed_acyclic_graph(graph):
            cycle = nx.find_cycle(graph)
            raise CycleError(f"parent graph is cyclic: {' -> '.join(u for u, _ in cycle)}")

        for node in table.values():
            check_covariance(node.noise_cov, f"node {node.id!r}", tol)

        self.graph = graph
        self.skeleton = graph.to_undirected(as_view=False)
        self.order: Tuple[str, ...] = tuple(nx.lexicographical_topological_sort(graph))
        self.index: Mapping[str, int] = MappingProxyType({v: i for i, v in enumerate(self.order)})
        self._ancestors = {v: frozenset(nx.ancestors(graph, v)) for v in self.order}
        self._descendants = {v: frozenset(nx.descendants(graph, v)) for v in self.order}
        self.arcs: Tuple[Tuple[str, str], ...] = tuple(sorted(graph.edges()))
        self.total_dim = sum(node.dim for node in table.values())

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.nodes

    def node(self, node_id: str) -> NodeSpec:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(f"unknown node {node_id!r}") from None

    def dim(self, node_id: str) -> int:
        return self.node(node_id).dim

    def parents(self, node_id: str) -> Tuple[str, ...]:
        return self.node(node_id).parent_ids

    def ancestors(self, node_id: str) -> frozenset:
        self.node(node_id)
        return self._ancestors[node_id]

    def descendants(self, node_id: str) -> frozenset:
        self.node(node_id)
        return self._descendants[node_id]

    def require(self, ids: Iterable[str]) -> None:
        unknown = sorted(set(ids) - set(self.nodes))
        if unknown:
            raise UnknownNode(f"unknown node(s): {', '.join(unknown)}")

    def domain(self, ids: Iterable[str]) -> frozenset:
        """D(S): the members of S plus every parent their distributions reference."""
        out = set()
        for node_id in ids:
            out.add(node_id)
            out.update(self.parents(node_id))
        return frozenset(out)

    def components(self) -> Tuple[frozenset, ...]:
        comps = [frozenset(c) for c in nx.connected_components(self.skeleton)]
        return tuple(sorted(comps, key=min))


def parse_network(document: Document, tol: Tolerances = DEFAULT_TOLERANCES) -> Network:
    """
    Build a validated Network from a network document (JSON text or the
    already-decoded mapping).
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise DocumentSyntaxError(f"network document is not valid JSON: {e}") from e
    try:
        _validate_document(document)
    except fastjsonschema.JsonSchemaException as e:
        raise DocumentSyntaxError(f"malformed network document: {e.message}") from e

    nodes = [_node_from_document(raw) for raw in document["nodes"]]
    net = Network(nodes, tol)
    logger.debug(f"Parsed network with {len(net)} nodes, total dim {net.total_dim}")
    return net


def _node_from_document(raw: Mapping[str, Any]) -> NodeSpec:
    node_id, dim = raw["id"], raw["dim"]
    mean = _as_matrix(raw["mean"], f"mean of {node_id!r}", ndim=1)
    if mean.shape != (dim,):
        raise ShapeError(f"mean of {node_id!r} has length {mean.shape[0]}, expected {dim}")
    cov = _as_matrix(raw["cov"], f"cov of {node_id!r}", ndim=2)
    if cov.shape != (dim, dim):
        raise ShapeError(f"cov of {node_id!r} has shape {cov.shape}, expected {(dim, dim)}")
    parents = []
    for parent in raw.get("parents", []):
        link = _as_matrix(parent["B"], f"link {parent['id']!r} -> {node_id!r}", ndim=2)
        parents.append(ParentLink(id=parent["id"], link=link))
    return NodeSpec(id=node_id, dim=dim, mean=mean, noise_cov=cov, parents=tuple(parents))


def _as_matrix(rows: Any, what: str, ndim: int) -> np.ndarray:
    if ndim == 2 and len(rows) == 0:
        return frozen(np.zeros((0, 0)))
    try:
        array = np.array(rows, dtype=float)
    except ValueError as e:
        # ragged nested lists
        raise ShapeError(f"{what} is not a rectangular matrix") from e
    if array.ndim != ndim:
        raise ShapeError(f"{what} must have {ndim} dimension(s), got {array.ndim}")
    if not np.all(np.isfinite(array)):
        raise DocumentSyntaxError(f"{what} has non-finite entries")
    return frozen(array)


def serialize_network(net: Network) -> Dict[str, Any]:
    """Inverse of parse_network; floats keep full round-trip precision."""
    nodes = []
    for node_id in net.order:
        node = net.nodes[node_id]
        entry: Dict[str, Any] = {
            "id": node.id,
            "dim": node.dim,
            "mean": [float(x) for x in node.mean],
            "cov": [[float(x) for x in row] for row in node.noise_cov],
        }
        if node.parents:
            entry["parents"] = [
                {"id": p.id, "B": [[float(x) for x in row] for row in p.link]}
                for p in node.parents
            ]
        nodes.append(entry)
    return {"nodes": nodes}


def dumps_network(net: Network) -> str:
    return json.dumps(serialize_network(net), indent=2)


def topological_order(net: Network) -> Tuple[str, ...]:
    """Kahn's ordering with ties broken by lexicographic id."""
    return net.order


def ancestral_closure(net: Network, seed: Iterable[str]) -> frozenset:
    seed = frozenset(seed)
    net.require(seed)
    closure = set(seed)
    for node_id in seed:
        closure |= net.ancestors(node_id)
    return frozenset(closure)


def skeleton_distances(net: Network, component: Optional[Iterable[str]] = None) -> Dict[str, float]:
    """
    Eccentricity of every node on the undirected skeleton (unit-weight BFS).

    Over the whole network, unreachable pairs make the eccentricity infinite;
    passing ``component`` restricts the computation to that node set.
    """
    graph = net.skeleton if component is None else net.skeleton.subgraph(component)
    total = graph.number_of_nodes()
    ecc: Dict[str, float] = {}
    for node_id in graph.nodes:
        lengths = nx.single_source_shortest_path_length(graph, node_id)
        if len(lengths) < total:
            ecc[node_id] = math.inf
        else:
            ecc[node_id] = max(lengths.values())
    return ecc


__all__ = [
    "Document",
    "NETWORK_SCHEMA",
    "ParentLink",
    "NodeSpec",
    "Network",
    "parse_network",
    "serialize_network",
    "dumps_network",
    "topological_order",
    "ancestral_closure",
    "skeleton_distances",
]
