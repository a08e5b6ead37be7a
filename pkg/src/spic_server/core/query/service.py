import logging
import threading
from collections import OrderedDict
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple

from .render import evidence_from_mapping, result_document
from .session import Session
from ..network.service import NetworkService
from ..spi_tree.tree import TreeMode
from ...consts import consts

logger = logging.getLogger(consts.LOGGER_NAME)


class SessionService:
    """
    Long-lived sessions keyed by (network digest, tree mode), so that repeated
    tool calls on the same network share one node cache.

    At most ``config.max_sessions`` are kept; opening one more drops the least
    recently used session together with its evidence.
    """

    def __init__(self, networks: NetworkService):
        self.networks = networks
        self.config = networks.config
        self.max_sessions = max(1, self.config.max_sessions)
        self._sessions: "OrderedDict[Tuple[str, str], Tuple[Session, threading.Lock]]" = OrderedDict()
        self._guard = threading.Lock()

    def _session(self, document: str, mode: Optional[str]) -> Tuple[Session, threading.Lock]:
        mode = TreeMode(mode or self.config.tree_mode)
        net, digest = self.networks.parse_with_digest(document)
        key = (digest, mode.value)
        with self._guard:
            if key in self._sessions:
                self._sessions.move_to_end(key)
                return self._sessions[key]
            while len(self._sessions) >= self.max_sessions:
                (old_digest, old_mode), _ = self._sessions.popitem(last=False)
                logger.info(f"Dropping session for network {old_digest[:12]} ({old_mode})")
            logger.info(f"Opening session for network {digest[:12]} ({mode.value})")
            entry = (
                Session(net, mode, self.config.tolerances, self.config.substitution_fast_path),
                threading.Lock(),
            )
            self._sessions[key] = entry
            return entry

    def query(
            self,
            document: str,
            target: Iterable[str],
            given: Iterable[str] = (),
            evidence: Optional[Mapping[str, Any]] = None,
            mode: Optional[str] = None,
    ) -> Dict[str, Any]:
        session, lock = self._session(document, mode)
        with lock:
            result = session.ask(target, given, evidence_from_mapping(evidence or {}))
        return result_document(result)

    def add_evidence(self, document: str, evidence: Mapping[str, Any], mode: Optional[str] = None) -> Dict[str, Any]:
        session, lock = self._session(document, mode)
        with lock:
            session.add_evidence(evidence_from_mapping(evidence))
            return _evidence_document(session)

    def retract_evidence(
            self,
            document: str,
            ids: Optional[Iterable[str]] = None,
            mode: Optional[str] = None,
    ) -> Dict[str, Any]:
        session, lock = self._session(document, mode)
        with lock:
            session.retract_evidence(ids)
            return _evidence_document(session)

    def __len__(self) -> int:
        return len(self._sessions)


def _evidence_document(session: Session) -> Dict[str, Any]:
    return {
        "evidence": {k: [float(x) for x in v] for k, v in sorted(session.evidence.items())},
        "cache_size": len(session.cache),
    }


__all__ = ["SessionService"]
