"""
Goal-directed query resolution over an SPI forest.

A query P(X | Y, E=e*) becomes an (L, M) request: L is the set of node
distributions to multiply, M the dimensions the answer must keep. Requests
travel down the SPI tree; a subtree that holds none of L never hears about
the query. Each tree node multiplies what its children return with its own
distribution, integrates out whatever nobody needs any more and caches the
result, so repeated or overlapping queries reuse earlier work. Evidence is
applied only above the cache.
"""
import logging
import threading
from collections import Counter
from types import MappingProxyType
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import attr
import networkx as nx
import numpy as np
from attr import dataclass

from ..gaussian.repr import (
    CombinedRepr,
    External,
    Member,
    condition,
    integrate_out,
    lift,
    multiply,
    substitute_evidence,
)
from ..gaussian.utils import frozen
from ..network.network import Network, ancestral_closure
from ..spi_tree.tree import SpiTree
from ...config.config import DEFAULT_TOLERANCES, Tolerances
from ...consts import consts
from ...errors import CombinabilityError, QueryError, ShapeError

logger = logging.getLogger(consts.LOGGER_NAME)

_OUTSIDE = -1
_FOREST = "*"


@dataclass(frozen=True, eq=False)
class Query:
    targets: Tuple[str, ...]
    given: Tuple[str, ...] = ()
    evidence: Mapping[str, np.ndarray] = MappingProxyType({})

    @classmethod
    def create(
            cls,
            targets: Iterable[str],
            given: Iterable[str] = (),
            evidence: Optional[Mapping[str, Any]] = None,
    ) -> "Query":
        """Normalize ids (order kept, duplicates dropped); observed conditioners count as evidence."""
        evidence = {k: frozen(np.asarray(v, dtype=float).reshape(-1)) for k, v in (evidence or {}).items()}
        targets = tuple(dict.fromkeys(targets))
        given = tuple(y for y in dict.fromkeys(given) if y not in evidence)
        return cls(targets=targets, given=given, evidence=MappingProxyType(evidence))

    def validate(self, net: Network) -> None:
        if not self.targets:
            raise QueryError("a query needs at least one target")
        net.require(self.targets + self.given + tuple(self.evidence))
        both = set(self.targets) & set(self.given)
        if both:
            raise QueryError(f"{sorted(both)} are both targets and conditioners")
        both = set(self.targets) & set(self.evidence)
        if both:
            raise QueryError(f"{sorted(both)} are both targets and evidence")
        for node_id, value in self.evidence.items():
            if value.shape != (net.dim(node_id),):
                raise ShapeError(
                    f"evidence for {node_id!r} has length {value.shape[0]}, expected {net.dim(node_id)}"
                )
            if not np.all(np.isfinite(value)):
                raise QueryError(f"evidence for {node_id!r} has non-finite values")

    @property
    def mentioned(self) -> frozenset:
        return frozenset(self.targets) | frozenset(self.given) | frozenset(self.evidence)


@dataclass(frozen=True)
class LMRequest:
    L: frozenset
    M: frozenset


@dataclass(frozen=True, eq=False)
class Block:
    """A partial product: its representation plus every node folded into it, integrated or not."""

    repr: CombinedRepr
    covered: frozenset


ReprSet = Tuple[Block, ...]


@dataclass
class Diagnostics:
    multiplications: int = 0
    integrations: int = 0
    substitutions: int = 0
    conditionings: int = 0
    cache_hits: int = 0
    requests: int = 0
    cache_size: int = 0
    requests_by_node: Counter = attr.Factory(Counter)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "multiplications": self.multiplications,
            "integrations": self.integrations,
            "substitutions": self.substitutions,
            "conditionings": self.conditionings,
            "cache_hits": self.cache_hits,
            "requests": self.requests,
            "cache_size": self.cache_size,
            "requests_by_node": dict(sorted(self.requests_by_node.items())),
        }


@dataclass(frozen=True, eq=False)
class QueryResult:
    members: Tuple[Member, ...]
    mean: np.ndarray
    cov: np.ndarray
    links: Tuple[External, ...]
    diagnostics: Diagnostics

    @property
    def member_ids(self) -> Tuple[str, ...]:
        return tuple(m.id for m in self.members)

    def link(self, given_id: str) -> Optional[np.ndarray]:
        for ext in self.links:
            if ext.id == given_id:
                return ext.link
        return None


class NodeCache:
    """
    Per-tree-node store of resolved ReprSets keyed by canonical (node, L, M).

    Entries are immutable; reads need no lock and concurrent insertion of the
    same key is harmless because resolution is deterministic.
    """

    def __init__(self):
        self._entries: Dict[Tuple, ReprSet] = {}
        self._lock = threading.Lock()

    @staticmethod
    def key(node: str, req: LMRequest) -> Tuple:
        return node, tuple(sorted(req.L)), tuple(sorted(req.M))

    def get(self, node: str, req: LMRequest) -> Optional[ReprSet]:
        return self._entries.get(self.key(node, req))

    def put(self, node: str, req: LMRequest, value: ReprSet) -> None:
        with self._lock:
            self._entries[self.key(node, req)] = value

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()

    def __len__(self) -> int:
        return len(self._entries)


def exogenous_nodes(q: Query, net: Network) -> frozenset:
    """
    Conditioners and evidence whose whole ancestry is itself conditioned on.

    Leaving these out of L keeps them as links of the resolved distribution.
    When some conditioner or evidence node must still be handled by Gaussian
    conditioning, only evidence qualifies, so that the resolved joint carries
    no symbolic links at conditioning time.
    """
    given, observed = frozenset(q.given), frozenset(q.evidence)
    candidates = given | observed
    exo = frozenset(v for v in candidates if net.ancestors(v) <= candidates)
    if candidates - exo:
        exo = frozenset(v for v in observed if net.ancestors(v) <= observed)
    return exo


def compute_lm(q: Query, net: Network, exogenous: bool = False) -> LMRequest:
    """
    L = ancestral closure of X ∪ Y ∪ keys(E); M = (X ∪ Y ∪ keys(E)) ∩ D(L).

    With ``exogenous`` the exogenous conditioners/evidence are taken out of L
    and stay in D(L) only as links.
    """
    mentioned = q.mentioned
    L = ancestral_closure(net, mentioned)
    if exogenous:
        L = L - exogenous_nodes(q, net)
    M = mentioned & net.domain(L)
    return LMRequest(L=frozenset(L), M=frozenset(M))


class _Resolver:
    def __init__(
            self,
            net: Network,
            tree: SpiTree,
            cache: NodeCache,
            diagnostics: Diagnostics,
            tol: Tolerances,
    ):
        self.net = net
        self.tree = tree
        self.cache = cache
        self.diagnostics = diagnostics
        self.tol = tol

    def resolve(self, node: str, req: LMRequest) -> ReprSet:
        self.diagnostics.requests += 1
        self.diagnostics.requests_by_node[node] += 1

        cached = self.cache.get(node, req)
        if cached is not None:
            self.diagnostics.cache_hits += 1
            logger.debug(f"Cache hit at {node!r} for L={sorted(req.L)} M={sorted(req.M)}")
            return cached

        blocks: List[Block] = []
        for child in self.tree.children[node]:
            l_child = req.L & self.tree.subtree[child]
            if not l_child:
                continue
            # keep what the caller wants and what the rest of L still references
            m_child = self.net.domain(l_child) & (req.M | self.net.domain(req.L - l_child))
            logger.debug(f"Request {node!r} -> {child!r}: L={sorted(l_child)} M={sorted(m_child)}")
            blocks.extend(self.resolve(child, LMRequest(l_child, m_child)))
        if node in req.L:
            blocks.append(Block(lift(self.net.node(node)), frozenset([node])))

        blocks = self._fold(node, blocks)
        result = tuple(self._integrate(blocks, req.M))
        self.cache.put(node, req, result)
        return result

    def _order_key(self, block: Block) -> int:
        return min(self.net.index[v] for v in block.covered)

    def _block_graph(self, node: str, blocks: Sequence[Block]) -> nx.DiGraph:
        """Block-level dependency graph with every node outside this subtree lumped together."""
        owner: Dict[str, int] = {}
        for i, block in enumerate(blocks):
            for v in block.covered:
                owner[v] = i
        inside = self.tree.subtree[node]
        graph = nx.DiGraph()
        graph.add_nodes_from(range(len(blocks)))
        graph.add_node(_OUTSIDE)
        for u, v in self.net.arcs:
            bu = owner.get(u, None if u in inside else _OUTSIDE)
            bv = owner.get(v, None if v in inside else _OUTSIDE)
            if bu is None or bv is None or bu == bv:
                continue
            graph.add_edge(bu, bv)
        return graph

    @staticmethod
    def _detour(graph: nx.DiGraph, a: int, b: int) -> bool:
        """Is there a path a -> ... -> b through at least one other block?"""
        rest = graph.subgraph(n for n in graph.nodes if n != a)
        return any(z != b and nx.has_path(rest, z, b) for z in graph.successors(a))

    def _fold(self, node: str, blocks: List[Block]) -> List[Block]:
        """
        Multiply blocks pairwise until no safe merge remains.

        Two blocks merge only when no path of length two or more joins them in
        the block graph; merging then keeps the global block graph acyclic, so
        every merge has a valid orientation and the root fold completes.
        """
        blocks = sorted(blocks, key=self._order_key)
        while len(blocks) > 1:
            graph = self._block_graph(node, blocks)
            pair = None
            for i in range(len(blocks)):
                for j in range(i + 1, len(blocks)):
                    if not (self._detour(graph, i, j) or self._detour(graph, j, i)):
                        pair = (i, j)
                        break
                if pair is not None:
                    break
            if pair is None:
                logger.debug(f"Deferring {len(blocks)} blocks at {node!r}")
                break
            i, j = pair
            merged = self._merge(blocks[i], blocks[j])
            blocks = sorted(
                [b for k, b in enumerate(blocks) if k not in pair] + [merged],
                key=self._order_key,
            )
        return blocks

    def _merge(self, first: Block, second: Block) -> Block:
        if first.repr.references(second.repr):
            first, second = second, first
        if not (first.repr.is_empty or second.repr.is_empty):
            self.diagnostics.multiplications += 1
        logger.debug(f"Multiply {list(first.repr.member_ids)} x {list(second.repr.member_ids)}")
        product = multiply(first.repr, second.repr, self.tol)
        return Block(product, first.covered | second.covered)

    def _integrate(self, blocks: Sequence[Block], keep: frozenset) -> List[Block]:
        out = []
        for i, block in enumerate(blocks):
            referenced = set()
            for k, other in enumerate(blocks):
                if k != i:
                    referenced.update(other.repr.external_ids)
            victims = [m for m in block.repr.member_ids if m not in keep and m not in referenced]
            current = block.repr
            if victims:
                self.diagnostics.integrations += 1
                logger.debug(f"Integrate out {victims}")
                current = integrate_out(current, victims)
            if current.is_empty:
                continue
            out.append(Block(current, block.covered))
        return out


def resolve(
        net: Network,
        tree: SpiTree,
        tree_node: str,
        req: LMRequest,
        cache: NodeCache,
        diagnostics: Optional[Diagnostics] = None,
        tol: Tolerances = DEFAULT_TOLERANCES,
) -> ReprSet:
    """Answer an (L, M) request at ``tree_node``; L must lie inside its subtree."""
    if not req.L <= tree.subtree[tree_node]:
        raise QueryError(f"L={sorted(req.L)} is not inside the subtree of {tree_node!r}")
    diagnostics = diagnostics if diagnostics is not None else Diagnostics()
    return _Resolver(net, tree, cache, diagnostics, tol).resolve(tree_node, req)


def _resolve_forest(
        net: Network,
        forest: Sequence[SpiTree],
        lm: LMRequest,
        cache: NodeCache,
        diagnostics: Diagnostics,
        tol: Tolerances,
) -> CombinedRepr:
    spanned = frozenset().union(*(tree.nodes for tree in forest))
    if not lm.L <= spanned:
        raise QueryError(f"{sorted(lm.L - spanned)} are not covered by the given SPI trees")
    cached = cache.get(_FOREST, lm)
    if cached is not None:
        diagnostics.cache_hits += 1
        return cached[0].repr

    joint = CombinedRepr.empty()
    for tree in forest:
        l_tree = lm.L & tree.nodes
        if not l_tree:
            continue
        req = LMRequest(l_tree, lm.M & net.domain(l_tree))
        blocks = _Resolver(net, tree, cache, diagnostics, tol).resolve(tree.root, req)
        if len(blocks) != 1:
            raise CombinabilityError(
                f"fold at root {tree.root!r} left {len(blocks)} blocks: "
                f"{[list(b.repr.member_ids) for b in blocks]}"
            )
        if not joint.is_empty:
            diagnostics.multiplications += 1
        joint = multiply(joint, blocks[0].repr, tol)
    cache.put(_FOREST, lm, (Block(joint, lm.L),))
    return joint


def answer_query(
        q: Query,
        net: Network,
        tree: Sequence[SpiTree],
        cache: NodeCache,
        tol: Tolerances = DEFAULT_TOLERANCES,
        fast_path: bool = False,
) -> QueryResult:
    """
    Resolve ``q`` and apply its evidence.

    Evidence still present as a link is substituted into the mean; evidence
    and conditioners that ended up as members are handled by Schur
    conditioning. ``tree`` is a single SpiTree or a forest.
    """
    forest = (tree,) if isinstance(tree, SpiTree) else tuple(tree)
    q.validate(net)
    diagnostics = Diagnostics()
    lm = compute_lm(q, net, exogenous=fast_path)
    joint = _resolve_forest(net, forest, lm, cache, diagnostics, tol)

    linked = {e: v for e, v in q.evidence.items() if e in joint.external_ids}
    current = substitute_evidence(joint, linked)
    if linked:
        diagnostics.substitutions += 1
        logger.debug(f"Substituted evidence {sorted(linked)}")

    observed = {e: v for e, v in q.evidence.items() if e in current.member_ids}
    symbolic = [y for y in q.given if y in current.member_ids]
    if observed or symbolic:
        diagnostics.conditionings += 1
        current = condition(current, list(observed) + symbolic, observed, tol)

    current = current.reorder(q.targets)
    links = []
    for y in q.given:
        ext = current.external(y)
        if ext is None:
            # y does not influence X
            ext = External(y, frozen(np.zeros((current.dim, net.dim(y)))))
        links.append(ext)

    diagnostics.cache_size = len(cache)
    return QueryResult(
        members=current.members,
        mean=current.mean,
        cov=current.noise_cov,
        links=tuple(links),
        diagnostics=diagnostics,
    )


__all__ = [
    "Query",
    "LMRequest",
    "Block",
    "ReprSet",
    "Diagnostics",
    "QueryResult",
    "NodeCache",
    "exogenous_nodes",
    "compute_lm",
    "resolve",
    "answer_query",
]
