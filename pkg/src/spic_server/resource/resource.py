"""
MCP resource routing.

Each provider owns one URI scheme (``network://<stem>`` for stored network
documents). Listing walks every provider in registration order; reading is
dispatched on the scheme of the requested URI.
"""
import logging
from abc import ABC, abstractmethod
from typing import AsyncGenerator, Dict, Iterable, List

from mcp import types
from mcp.server.lowlevel.helper_types import ReadResourceContents

from ..consts import consts

logger = logging.getLogger(consts.LOGGER_NAME)

ResourceContents = str | bytes | Iterable[ReadResourceContents]


class ResourceProvider(ABC):
    """Serves the resources under a single URI scheme."""

    def __init__(self, scheme: str):
        self.scheme = scheme

    @abstractmethod
    async def list_resources(self, **kwargs) -> list[types.Resource]:
        ...

    @abstractmethod
    async def read_resource(self, uri: types.AnyUrl, **kwargs) -> ResourceContents:
        ...


_providers_by_scheme: Dict[str, ResourceProvider] = {}


def schemes() -> List[str]:
    return list(_providers_by_scheme)


async def list_resources(**kwargs) -> AsyncGenerator[types.Resource, None]:
    for provider in _providers_by_scheme.values():
        for item in await provider.list_resources(**kwargs):
            yield item


async def read_resource(uri: types.AnyUrl, **kwargs) -> ResourceContents:
    provider = _providers_by_scheme.get(uri.scheme)
    if provider is None:
        raise ValueError(f"No resource provider for {uri.scheme}:// (serving: {', '.join(schemes()) or 'none'})")
    logger.debug(f"Reading resource {uri}")
    return await provider.read_resource(uri=uri, **kwargs)


def register_resource_provider(provider: ResourceProvider) -> None:
    if provider.scheme in _providers_by_scheme:
        raise ValueError(f"Scheme {provider.scheme}:// already has a resource provider")
    _providers_by_scheme[provider.scheme] = provider
    logger.debug(f"Serving {provider.scheme}:// resources")


def reset() -> None:
    _providers_by_scheme.clear()


__all__ = [
    "ResourceContents",
    "ResourceProvider",
    "schemes",
    "list_resources",
    "read_resource",
    "register_resource_provider",
    "reset",
]
