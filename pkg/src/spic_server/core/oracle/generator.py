import logging
from typing import Any, Dict, List, Optional

import numpy as np

from ..network.network import Network, parse_network
from ..query.engine import Query
from ...config.config import DEFAULT_TOLERANCES, Tolerances
from ...consts import consts

logger = logging.getLogger(consts.LOGGER_NAME)


def random_document(seed: int, n_nodes: int, max_parents: int = 3, max_dim: int = 3) -> Dict[str, Any]:
    """
    Random linear-Gaussian network document, deterministic in ``seed``.

    Nodes get shuffled ids so that generation order and lexicographic order
    disagree. Links are uniform in [-2, 2], means uniform in [-3, 3] and
    noise covariances A A^T + 0.1 I with A uniform in [-1, 1].
    """
    rng = np.random.default_rng(seed)
    width = len(str(max(n_nodes - 1, 0)))
    ids = [f"n{i:0{width}d}" for i in range(n_nodes)]
    order = [ids[i] for i in rng.permutation(n_nodes)]
    dims = {v: int(rng.integers(1, max_dim + 1)) for v in order}

    nodes: List[Dict[str, Any]] = []
    for k, v in enumerate(order):
        dim = dims[v]
        n_parents = int(rng.integers(0, min(max_parents, k) + 1))
        parents = []
        if n_parents:
            for j in sorted(rng.choice(k, size=n_parents, replace=False)):
                p = order[int(j)]
                parents.append({"id": p, "B": rng.uniform(-2.0, 2.0, (dim, dims[p])).tolist()})
        a = rng.uniform(-1.0, 1.0, (dim, dim))
        cov = a @ a.T + 0.1 * np.eye(dim)
        nodes.append({
            "id": v,
            "dim": dim,
            "mean": rng.uniform(-3.0, 3.0, dim).tolist(),
            "cov": (0.5 * (cov + cov.T)).tolist(),
            "parents": parents,
        })
    return {"nodes": nodes}


def random_network(
        seed: int,
        n_nodes: int,
        max_parents: int = 3,
        max_dim: int = 3,
        tol: Tolerances = DEFAULT_TOLERANCES,
) -> Network:
    return parse_network(random_document(seed, n_nodes, max_parents, max_dim), tol)


def random_query(
        rng: np.random.Generator,
        net: Network,
        max_targets: int = 3,
        evidence_rate: float = 0.25,
        given_rate: float = 0.15,
) -> Query:
    """Random targets; each remaining node is observed, conditioned on symbolically or left out."""
    ids = [net.order[i] for i in rng.permutation(len(net))]
    n_targets = int(rng.integers(1, min(max_targets, len(ids)) + 1))
    targets, rest = ids[:n_targets], ids[n_targets:]
    given, evidence = [], {}
    for v in rest:
        draw = rng.random()
        if draw < evidence_rate:
            evidence[v] = rng.uniform(-5.0, 5.0, net.dim(v))
        elif draw < evidence_rate + given_rate:
            given.append(v)
    return Query.create(targets, given, evidence)


def random_queries(seed: int, net: Network, count: int, rng: Optional[np.random.Generator] = None) -> List[Query]:
    rng = rng if rng is not None else np.random.default_rng([seed, 1])
    return [random_query(rng, net) for _ in range(count)]


__all__ = ["random_document", "random_network", "random_query", "random_queries"]
