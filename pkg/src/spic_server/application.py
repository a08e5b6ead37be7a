import logging
from contextlib import aclosing
from typing import Optional

import mcp.types as types
from mcp import LoggingLevel
from mcp.server.lowlevel import Server
from mcp.types import AnyUrl, EmptyResult, Tool

from . import core
from .config import config
from .consts import consts
from .core.version import version
from .resource import resource
from .tools import tools

logger = logging.getLogger(consts.LOGGER_NAME)

_INSTRUCTIONS = (
    "Exact inference on linear-Gaussian Bayesian networks. Pass the network document as JSON text; "
    "validate it with validate_network, then ask query_network for P(target | given, evidence). "
    "Evidence recorded with add_evidence stays in force for later queries on the same network "
    "until retract_evidence removes it."
)


def create_server(cfg: Optional[config.Config] = None) -> Server:
    """Register every tool and resource provider for ``cfg`` and wire them into a lowlevel MCP server."""
    tools.reset()
    resource.reset()
    cfg = core.load(cfg)
    server = Server(consts.SERVER_NAME, version=version.VERSION, instructions=_INSTRUCTIONS)

    @server.set_logging_level()
    async def set_logging_level(level: LoggingLevel) -> EmptyResult:
        logger.setLevel(level.upper())
        await server.request_context.session.send_log_message(
            level="warning", data=f"Log level set to {level}", logger=consts.LOGGER_NAME
        )
        return EmptyResult()

    @server.list_resources()
    async def list_resources(**kwargs) -> list[types.Resource]:
        resource_list = []
        async with aclosing(resource.list_resources(**kwargs)) as results:
            async for result in results:
                resource_list.append(result)
        return resource_list

    @server.read_resource()
    async def read_resource(uri: AnyUrl) -> str:
        return await resource.read_resource(uri)

    @server.list_tools()
    async def handle_list_tools() -> list[Tool]:
        return tools.all_tools()

    @server.call_tool()
    async def call_tool(name: str, arguments: dict):
        return await tools.call_tool(name, arguments)

    logger.info(f"MCP server ready with {len(tools.all_tools())} tools, networks from {cfg.network_dir or '-'}")
    return server


__all__ = ["create_server"]
