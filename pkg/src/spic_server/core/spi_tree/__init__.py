from .tools import register_tools
from ..network.service import NetworkService


def load(networks: NetworkService):
    register_tools(networks)


__all__ = ["load"]
