import enum
import logging
import math
from types import MappingProxyType
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

from attr import dataclass

from ..network.network import Network, skeleton_distances
from ...consts import consts
from ...errors import EmptyComponent, UnknownNode

logger = logging.getLogger(consts.LOGGER_NAME)


class TreeMode(str, enum.Enum):
    BUSHY = consts.TREE_MODE_BUSHY
    CHAIN = consts.TREE_MODE_CHAIN


@dataclass(frozen=True)
class McsStep:
    node: str
    visited_neighbours: int
    parent: Optional[str]


@dataclass(frozen=True)
class Violation:
    arc: Tuple[str, str]

    def __str__(self) -> str:
        return f"arc {self.arc[0]} -> {self.arc[1]} joins tree-incomparable nodes"


class SpiTree:
    """
    Rooted tree over the nodes of one skeleton component.

    Every network arc joins two nodes of which one is a tree ancestor of the
    other. Structure is immutable after build.
    """

    def __init__(
            self,
            root: str,
            parent: Mapping[str, Optional[str]],
            mode: TreeMode,
            requested_mode: TreeMode,
            mcs_trace: Tuple[McsStep, ...] = (),
    ):
        self.root = root
        self.parent: Mapping[str, Optional[str]] = MappingProxyType(dict(parent))
        self.mode = mode
        self.requested_mode = requested_mode
        self.mcs_trace = mcs_trace
        self.nodes = frozenset(self.parent)

        children: Dict[str, List[str]] = {v: [] for v in self.parent}
        for v, p in self.parent.items():
            if p is not None:
                children[p].append(v)
        self.children: Mapping[str, Tuple[str, ...]] = MappingProxyType(
            {v: tuple(sorted(c)) for v, c in children.items()}
        )

        depth: Dict[str, int] = {}
        for v in self.parent:
            depth[v] = len(self.root_path(v)) - 1
        self.depth: Mapping[str, int] = MappingProxyType(depth)

        subtree: Dict[str, frozenset] = {}
        for v in sorted(self.parent, key=lambda x: -depth[x]):
            members = {v}
            for c in self.children[v]:
                members |= subtree[c]
            subtree[v] = frozenset(members)
        self.subtree: Mapping[str, frozenset] = MappingProxyType(subtree)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.parent

    def root_path(self, node_id: str) -> List[str]:
        """Nodes from ``node_id`` up to the root, inclusive."""
        if node_id not in self.parent:
            raise UnknownNode(f"{node_id!r} is not in the tree rooted at {self.root!r}")
        path = [node_id]
        while self.parent[path[-1]] is not None:
            path.append(self.parent[path[-1]])
        return path

    def is_ancestor(self, ancestor: str, node_id: str) -> bool:
        """Reflexive: a node counts as its own ancestor."""
        return ancestor in self.subtree and node_id in self.subtree[ancestor]

    @property
    def mcs_order(self) -> Tuple[str, ...]:
        return tuple(step.node for step in self.mcs_trace)


def choose_root(net: Network, component: Iterable[str]) -> str:
    """Node of minimum eccentricity within ``component``; ties go to the smallest id."""
    component = frozenset(component)
    if not component:
        raise EmptyComponent("cannot choose a root for an empty component")
    net.require(component)
    ecc = skeleton_distances(net, component)
    return min(component, key=lambda v: (ecc[v], v))


def _mcs_order(net: Network, root: str, component: frozenset) -> List[Tuple[str, int]]:
    """Maximum cardinality search from ``root``; ties by lexicographic id."""
    visited = {root}
    order = [(root, 0)]
    weight = {v: 0 for v in component if v != root}
    for v in net.skeleton.neighbors(root):
        if v in weight:
            weight[v] += 1
    while weight:
        best = min(weight, key=lambda v: (-weight[v], v))
        order.append((best, weight.pop(best)))
        visited.add(best)
        for v in net.skeleton.neighbors(best):
            if v in weight:
                weight[v] += 1
    return order


def build_tree(net: Network, root: str, mode: TreeMode = TreeMode.BUSHY) -> SpiTree:
    """
    Lay the component containing ``root`` out as an SPI tree.

    Chain mode hangs every node under the previously visited one. Bushy mode
    hangs a node under the deepest of its already-visited skeleton neighbours,
    provided the others all lie on that neighbour's root path; when they do
    not, the whole build is redone in chain mode.
    """
    mode = TreeMode(mode)
    net.require([root])
    component = next(c for c in net.components() if root in c)
    order = _mcs_order(net, root, component)

    if mode is TreeMode.BUSHY:
        tree = _attach_bushy(net, root, order)
        if tree is not None:
            return tree
        logger.debug(f"Neighbour set is not a chain under root {root!r}, rebuilding as chain")
    return _attach_chain(root, order, requested_mode=mode)


def _attach_chain(root: str, order: List[Tuple[str, int]], requested_mode: TreeMode) -> SpiTree:
    parent: Dict[str, Optional[str]] = {root: None}
    trace = [McsStep(root, 0, None)]
    for prev, (v, count) in zip(order, order[1:]):
        parent[v] = prev[0]
        trace.append(McsStep(v, count, prev[0]))
    return SpiTree(root, parent, TreeMode.CHAIN, requested_mode, tuple(trace))


def _attach_bushy(net: Network, root: str, order: List[Tuple[str, int]]) -> Optional[SpiTree]:
    parent: Dict[str, Optional[str]] = {root: None}
    depth = {root: 0}
    trace = [McsStep(root, 0, None)]

    def root_path(v: str) -> set:
        path = {v}
        while parent[v] is not None:
            v = parent[v]
            path.add(v)
        return path

    for v, count in order[1:]:
        visited = [u for u in net.skeleton.neighbors(v) if u in parent]
        if not visited:
            attach = root
        else:
            deepest = min(visited, key=lambda u: (-depth[u], u))
            on_path = root_path(deepest)
            if any(u not in on_path for u in visited):
                return None
            attach = deepest
        parent[v] = attach
        depth[v] = depth[attach] + 1
        trace.append(McsStep(v, count, attach))
    return SpiTree(root, parent, TreeMode.BUSHY, TreeMode.BUSHY, tuple(trace))


def verify_constraint(tree: SpiTree, net: Network) -> List[Violation]:
    """Every arc among tree nodes must join ancestor-comparable nodes."""
    violations = []
    for u, v in net.arcs:
        if u not in tree or v not in tree:
            continue
        if not (tree.is_ancestor(u, v) or tree.is_ancestor(v, u)):
            violations.append(Violation((u, v)))
    return violations


def build_forest(net: Network, mode: TreeMode = TreeMode.BUSHY) -> Tuple[SpiTree, ...]:
    """One SPI tree per skeleton component, ordered by smallest node id."""
    return tuple(build_tree(net, choose_root(net, comp), mode) for comp in net.components())


def tree_report(net: Network, forest: Tuple[SpiTree, ...]) -> Dict[str, Any]:
    """Machine-readable description of a forest, shared by the CLI and the MCP tool."""
    trees = []
    for tree in forest:
        ecc = skeleton_distances(net, tree.nodes)
        violations = verify_constraint(tree, net)
        trees.append({
            "root": tree.root,
            "mode": tree.mode.value,
            "requested_mode": tree.requested_mode.value,
            "eccentricity": {v: (None if math.isinf(e) else e) for v, e in sorted(ecc.items())},
            "mcs_order": [
                {"id": s.node, "visited_neighbours": s.visited_neighbours} for s in tree.mcs_trace
            ],
            "parent": {v: tree.parent[v] for v in sorted(tree.parent)},
            "constraint_ok": not violations,
            "violations": [list(x.arc) for x in violations],
        })
    return {"components": len(forest), "trees": trees}


__all__ = [
    "TreeMode",
    "McsStep",
    "Violation",
    "SpiTree",
    "choose_root",
    "build_tree",
    "build_forest",
    "verify_constraint",
    "tree_report",
]
