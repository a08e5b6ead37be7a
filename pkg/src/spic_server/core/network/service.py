import hashlib
import json
import logging
import os
from typing import Dict, List, Tuple

from .network import Document, Network, parse_network, serialize_network
from ...config import config
from ...consts import consts
from ...errors import UnknownNode

logger = logging.getLogger(consts.LOGGER_NAME)


class NetworkService:
    """Parses network documents with the configured tolerances and serves the network directory."""

    def __init__(self, cfg: config.Config):
        self.config = cfg

    def parse(self, document: Document) -> Network:
        return parse_network(document, self.config.tolerances)

    def parse_with_digest(self, document: Document) -> Tuple[Network, str]:
        net = self.parse(document)
        return net, network_digest(net)

    def list_networks(self) -> List[str]:
        """Stems of the ``*.json`` files in the network directory, sorted."""
        root = self.config.network_dir
        if not root or not os.path.isdir(root):
            return []
        return sorted(name[:-5] for name in os.listdir(root) if name.endswith(".json"))

    def read_network(self, stem: str) -> str:
        if stem not in self.list_networks():
            raise UnknownNode(f"no network named {stem!r} in {self.config.network_dir!r}")
        with open(os.path.join(self.config.network_dir, f"{stem}.json"), encoding="utf-8") as f:
            return f.read()


def network_digest(net: Network) -> str:
    """Stable content hash of a network, independent of document formatting."""
    canonical = json.dumps(serialize_network(net), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def describe(net: Network) -> Dict:
    return {
        "nodes": len(net),
        "total_dim": net.total_dim,
        "order": list(net.order),
        "dims": {v: net.dim(v) for v in net.order},
        "arcs": [list(a) for a in net.arcs],
        "components": [sorted(c) for c in net.components()],
    }


__all__ = ["NetworkService", "network_digest", "describe"]
