import logging

from mcp import types

from .check import check_async
from ..spi_tree.tools import MODE_PROPERTY
from ..spi_tree.tree import TreeMode
from ...config import config
from ...consts import consts
from ...tools import tools

logger = logging.getLogger(consts.LOGGER_NAME)


class _ToolImpl:
    def __init__(self, cfg: config.Config):
        self.config = cfg

    @tools.tool_meta(
        types.Tool(
            name="oracle_check",
            description="Cross-check the inference engine against dense joint-Gaussian algebra on seeded "
                        "random networks and random queries; reports the largest deviation and any failures.",
            inputSchema={
                "type": "object",
                "properties": {
                    "seeds": {"type": "integer", "minimum": 1, "maximum": 1000,
                              "description": "Number of random networks (seeds 0..seeds-1), default 20"},
                    "nodes": {"type": "integer", "minimum": 1, "maximum": 40,
                              "description": "Nodes per network, default 12"},
                    "queries": {"type": "integer", "minimum": 1, "maximum": 100,
                                "description": "Random queries per network, default 5"},
                    "tol": {"type": "number", "exclusiveMinimum": 0,
                            "description": "Accepted deviation, default from SPIC_TOLERANCE"},
                    "mode": MODE_PROPERTY,
                },
                "required": [],
            },
        )
    )
    async def oracle_check(self, **kwargs) -> list[types.TextContent]:
        report = await check_async(
            seeds=kwargs.get("seeds", 20),
            nodes=kwargs.get("nodes", 12),
            queries=kwargs.get("queries", 5),
            check_tol=kwargs.get("tol", self.config.check_tol),
            workers=self.config.workers,
            mode=TreeMode(kwargs.get("mode") or self.config.tree_mode),
            tol=self.config.tolerances,
            fast_path=self.config.substitution_fast_path,
        )
        return tools.text_result(report.as_dict())


def register_tools(cfg: config.Config):
    tool_impl = _ToolImpl(cfg)
    tools.auto_register_tools(
        [
            tool_impl.oracle_check,
        ]
    )
