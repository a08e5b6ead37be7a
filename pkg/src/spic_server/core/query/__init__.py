from .service import SessionService
from .tools import register_tools
from ..network.service import NetworkService


def load(networks: NetworkService) -> SessionService:
    sessions = SessionService(networks)
    register_tools(sessions)
    return sessions


__all__ = ["load"]
