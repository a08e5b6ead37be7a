import logging

from mcp import types

from .service import SessionService
from ..network.tools import DOCUMENT_PROPERTY
from ..spi_tree.tools import MODE_PROPERTY
from ...consts import consts
from ...tools import tools

logger = logging.getLogger(consts.LOGGER_NAME)

_EVIDENCE_PROPERTY = {
    "type": "object",
    "description": "Observed values keyed by node id; a number for 1-dimensional nodes or a list of numbers.",
    "additionalProperties": {
        "anyOf": [
            {"type": "number"},
            {"type": "array", "items": {"type": "number"}},
        ],
    },
}

_IDS_PROPERTY = {
    "type": "array",
    "items": {"type": "string"},
}


class _ToolImpl:
    def __init__(self, sessions: SessionService):
        self.sessions = sessions

    @tools.tool_meta(
        types.Tool(
            name="query_network",
            description="Answer P(target | given, evidence) on a linear-Gaussian network. Returns the block "
                        "layout, mean, covariance, the linear links K_y of every symbolic conditioner y "
                        "(target = mean + sum K_y y) and operation counters. Evidence previously added to "
                        "the network's session applies as well; results are cached per network.",
            inputSchema={
                "type": "object",
                "properties": {
                    "document": DOCUMENT_PROPERTY,
                    "target": dict(_IDS_PROPERTY, minItems=1, description="Target node ids, in output order."),
                    "given": dict(_IDS_PROPERTY, description="Node ids to condition on symbolically."),
                    "evidence": _EVIDENCE_PROPERTY,
                    "mode": MODE_PROPERTY,
                },
                "required": ["document", "target"],
            },
        )
    )
    def query_network(self, **kwargs) -> list[types.TextContent]:
        document = self.sessions.query(
            kwargs["document"],
            kwargs["target"],
            kwargs.get("given", []),
            kwargs.get("evidence"),
            kwargs.get("mode"),
        )
        return tools.text_result(document)

    @tools.tool_meta(
        types.Tool(
            name="add_evidence",
            description="Record observed values in the network's session. Later queries on the same "
                        "network use them without recomputing cached distributions.",
            inputSchema={
                "type": "object",
                "properties": {
                    "document": DOCUMENT_PROPERTY,
                    "evidence": _EVIDENCE_PROPERTY,
                    "mode": MODE_PROPERTY,
                },
                "required": ["document", "evidence"],
            },
        )
    )
    def add_evidence(self, **kwargs) -> list[types.TextContent]:
        document = self.sessions.add_evidence(kwargs["document"], kwargs["evidence"], kwargs.get("mode"))
        return tools.text_result(document)

    @tools.tool_meta(
        types.Tool(
            name="retract_evidence",
            description="Remove observed values from the network's session; without ids all evidence is dropped.",
            inputSchema={
                "type": "object",
                "properties": {
                    "document": DOCUMENT_PROPERTY,
                    "ids": dict(_IDS_PROPERTY, description="Node ids whose evidence is removed."),
                    "mode": MODE_PROPERTY,
                },
                "required": ["document"],
            },
        )
    )
    def retract_evidence(self, **kwargs) -> list[types.TextContent]:
        document = self.sessions.retract_evidence(kwargs["document"], kwargs.get("ids"), kwargs.get("mode"))
        return tools.text_result(document)


def register_tools(sessions: SessionService):
    tool_impl = _ToolImpl(sessions)
    tools.auto_register_tools(
        [
            tool_impl.query_network,
            tool_impl.add_evidence,
            tool_impl.retract_evidence,
        ]
    )
