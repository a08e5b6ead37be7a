from typing import Optional

from ..config import config
from .network import load as load_network
from .spi_tree import load as load_spi_tree
from .query import load as load_query
from .oracle import load as load_oracle
from .version import load as load_version


def load(cfg: Optional[config.Config] = None) -> config.Config:
    cfg = cfg if cfg is not None else config.load_config()

    # version
    load_version(cfg)
    # documents, network:// resources
    networks = load_network(cfg)
    # tree inspection
    load_spi_tree(networks)
    # queries and evidence sessions
    load_query(networks)
    # dense cross-check
    load_oracle(cfg)
    return cfg
