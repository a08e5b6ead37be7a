import logging

from mcp import types

from .service import NetworkService, describe
from ...consts import consts
from ...tools import tools

logger = logging.getLogger(consts.LOGGER_NAME)

_DOCUMENT_DESC = (
    "Network document as JSON text: {\"nodes\": [{\"id\", \"dim\", \"mean\", \"cov\", "
    "\"parents\": [{\"id\", \"B\"}]}]}. Each node is x = sum(B_i x_i) + w, w ~ N(mean, cov)."
)

DOCUMENT_PROPERTY = {"type": "string", "description": _DOCUMENT_DESC}


class _ToolImpl:
    def __init__(self, networks: NetworkService):
        self.networks = networks

    @tools.tool_meta(
        types.Tool(
            name="validate_network",
            description="Validate a linear-Gaussian network document and describe its structure: "
                        "node count, total dimension, topological order, dimensions, arcs and skeleton components.",
            inputSchema={
                "type": "object",
                "properties": {
                    "document": DOCUMENT_PROPERTY,
                },
                "required": ["document"],
            },
        )
    )
    def validate_network(self, **kwargs) -> list[types.TextContent]:
        net, digest = self.networks.parse_with_digest(kwargs["document"])
        report = describe(net)
        report["digest"] = digest
        return tools.text_result(report)


def register_tools(networks: NetworkService):
    tool_impl = _ToolImpl(networks)
    tools.auto_register_tools(
        [
            tool_impl.validate_network,
        ]
    )
