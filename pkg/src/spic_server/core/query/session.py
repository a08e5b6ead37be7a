import logging
from types import MappingProxyType
from typing import Any, Dict, Iterable, Mapping, Optional

import numpy as np

from .engine import Diagnostics, NodeCache, Query, QueryResult, answer_query
from ..gaussian.utils import frozen
from ..network.network import Network
from ..spi_tree.tree import TreeMode, build_forest
from ...config.config import DEFAULT_TOLERANCES, Tolerances
from ...consts import consts
from ...errors import QueryError, ShapeError, UnknownNode

logger = logging.getLogger(consts.LOGGER_NAME)


class Session:
    """
    A network, its SPI forest, a node cache and the evidence currently in force.

    The cache never holds evidence-dependent values, so adding, changing or
    retracting evidence leaves it valid.
    """

    def __init__(
            self,
            net: Network,
            mode: TreeMode = TreeMode.BUSHY,
            tol: Tolerances = DEFAULT_TOLERANCES,
            fast_path: bool = True,
    ):
        self.net = net
        self.tol = tol
        self.fast_path = fast_path
        self.forest = build_forest(net, TreeMode(mode))
        self.cache = NodeCache()
        self.last_diagnostics: Optional[Diagnostics] = None
        self._evidence: Dict[str, np.ndarray] = {}

    @property
    def evidence(self) -> Mapping[str, np.ndarray]:
        return MappingProxyType(self._evidence)

    def add_evidence(self, values: Mapping[str, Any]) -> "Session":
        """Set (or overwrite) observed values; all-or-nothing."""
        self.net.require(values)
        staged = {}
        for node_id, value in values.items():
            value = np.asarray(value, dtype=float).reshape(-1)
            if value.shape != (self.net.dim(node_id),):
                raise ShapeError(
                    f"evidence for {node_id!r} has length {value.shape[0]}, expected {self.net.dim(node_id)}"
                )
            if not np.all(np.isfinite(value)):
                raise QueryError(f"evidence for {node_id!r} has non-finite values")
            staged[node_id] = frozen(value)
        self._evidence.update(staged)
        logger.debug(f"Evidence now on {sorted(self._evidence)}")
        return self

    def retract_evidence(self, ids: Optional[Iterable[str]] = None) -> "Session":
        """Drop evidence on ``ids``, or all of it when ``ids`` is None."""
        if ids is None:
            self._evidence.clear()
            return self
        ids = list(ids)
        missing = sorted(set(ids) - set(self._evidence))
        if missing:
            raise UnknownNode(f"no evidence to retract on {missing}")
        for node_id in ids:
            del self._evidence[node_id]
        return self

    def ask(
            self,
            targets: Iterable[str],
            given: Iterable[str] = (),
            evidence: Optional[Mapping[str, Any]] = None,
    ) -> QueryResult:
        """Answer under the session evidence; ``evidence`` adds or overrides values for this call only."""
        query = Query.create(targets, given, {**self._evidence, **(evidence or {})})
        result = answer_query(query, self.net, self.forest, self.cache, self.tol, self.fast_path)
        self.last_diagnostics = result.diagnostics
        return result


def add_evidence(session: Session, values: Mapping[str, Any]) -> Session:
    return session.add_evidence(values)


def retract_evidence(session: Session, ids: Optional[Iterable[str]] = None) -> Session:
    return session.retract_evidence(ids)


__all__ = ["Session", "add_evidence", "retract_evidence"]
