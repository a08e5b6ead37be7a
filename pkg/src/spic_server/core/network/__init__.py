from .service import NetworkService
from .tools import register_tools
from .resource import register_resource_provider
from ...config import config


def load(cfg: config.Config) -> NetworkService:
    networks = NetworkService(cfg)
    register_tools(networks)
    register_resource_provider(networks)
    return networks


__all__ = ["load"]
