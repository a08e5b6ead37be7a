import logging

from mcp import types

from .tree import TreeMode, build_forest, tree_report
from ..network.service import NetworkService
from ..network.tools import DOCUMENT_PROPERTY
from ...consts import consts
from ...tools import tools

logger = logging.getLogger(consts.LOGGER_NAME)

MODE_PROPERTY = {
    "type": "string",
    "enum": [consts.TREE_MODE_BUSHY, consts.TREE_MODE_CHAIN],
    "description": "SPI tree layout. bushy hangs nodes under their deepest visited neighbour "
                   "and falls back to chain when that is impossible; chain is always valid.",
}


class _ToolImpl:
    def __init__(self, networks: NetworkService):
        self.networks = networks

    @tools.tool_meta(
        types.Tool(
            name="build_spi_tree",
            description="Build the SPI tree (one per skeleton component) for a network and report "
                        "root, eccentricities, search order, parent map and whether every arc joins "
                        "tree-comparable nodes.",
            inputSchema={
                "type": "object",
                "properties": {
                    "document": DOCUMENT_PROPERTY,
                    "mode": MODE_PROPERTY,
                },
                "required": ["document"],
            },
        )
    )
    def build_spi_tree(self, **kwargs) -> list[types.TextContent]:
        net = self.networks.parse(kwargs["document"])
        mode = TreeMode(kwargs.get("mode") or self.networks.config.tree_mode)
        return tools.text_result(tree_report(net, build_forest(net, mode)))


def register_tools(networks: NetworkService):
    tool_impl = _ToolImpl(networks)
    tools.auto_register_tools(
        [
            tool_impl.build_spi_tree,
        ]
    )
