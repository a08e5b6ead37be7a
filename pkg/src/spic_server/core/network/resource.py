import logging

from mcp import types

from .service import NetworkService
from ...consts import consts
from ...resource import resource
from ...resource.resource import ResourceContents

logger = logging.getLogger(consts.LOGGER_NAME)


class _ResourceProvider(resource.ResourceProvider):
    def __init__(self, networks: NetworkService):
        super().__init__(consts.NETWORK_RESOURCE_SCHEME)
        self.networks = networks

    async def list_resources(self, **kwargs) -> list[types.Resource]:
        resources = []
        for stem in self.networks.list_networks():
            resources.append(
                types.Resource(
                    uri=f"{self.scheme}://{stem}",
                    name=stem,
                    mimeType="application/json",
                    description=f"Linear-Gaussian network {stem}",
                )
            )
        logger.debug(f"Listed {len(resources)} network resources")
        return resources

    async def read_resource(self, uri: types.AnyUrl, **kwargs) -> ResourceContents:
        stem = uri.host or str(uri).split("://", 1)[-1]
        return self.networks.read_network(stem.rstrip("/"))


def register_resource_provider(networks: NetworkService):
    resource.register_resource_provider(_ResourceProvider(networks))
