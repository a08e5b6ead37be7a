"""
MCP tool registry.

Tools are bound methods tagged by ``tool_meta``; their input schema is compiled
with fastjsonschema at registration and checked before every call.
"""
import functools
import inspect
import json
import logging
from typing import Any, Awaitable, Callable, Dict, List, Union

import anyio
import fastjsonschema
from attr import dataclass
from mcp import types

from ..consts import consts
from ..errors import SpicError

logger = logging.getLogger(consts.LOGGER_NAME)

ToolResult = list[types.TextContent | types.ImageContent | types.EmbeddedResource]
ToolFunc = Callable[..., ToolResult]
AsyncToolFunc = Callable[..., Awaitable[ToolResult]]


@dataclass(frozen=True)
class _ToolEntry:
    meta: types.Tool
    func: Union[ToolFunc, AsyncToolFunc]
    validate: Callable[[Dict[str, Any]], Any]

    @property
    def is_async(self) -> bool:
        return inspect.iscoroutinefunction(self.func)

    async def invoke(self, arguments: Dict[str, Any]) -> ToolResult:
        name = self.meta.name
        try:
            self.validate(arguments)
        except fastjsonschema.JsonSchemaException as e:
            raise ValueError(f"Invalid arguments for tool {name}: {e}")

        try:
            if self.is_async:
                return await self.func(**arguments)
            # sync tools run on a worker thread
            return await anyio.to_thread.run_sync(functools.partial(self.func, **arguments))
        except SpicError as e:
            logger.warning(f"Tool {name} rejected its input: {e}")
            raise RuntimeError(f"Tool {name} execution error: {e.class_label()}: {e}") from e
        except Exception as e:
            logger.exception(f"Tool {name} failed")
            raise RuntimeError(f"Tool {name} execution error: {e}") from e


_all_tools: Dict[str, _ToolEntry] = {}


def all_tools() -> List[types.Tool]:
    if not _all_tools:
        raise ValueError("No tools registered")
    return [entry.meta for entry in _all_tools.values()]


def register_tool(meta: types.Tool, func: Union[ToolFunc, AsyncToolFunc]) -> None:
    """Register a tool; names must be unique."""
    if meta.name in _all_tools:
        raise ValueError(f"Tool {meta.name} already registered")
    _all_tools[meta.name] = _ToolEntry(meta=meta, func=func, validate=fastjsonschema.compile(meta.inputSchema))
    logger.debug(f"Registered tool {meta.name}")


def tool_meta(meta: types.Tool):
    """Tag a tool implementation with its MCP description."""

    def decorator(func):
        func.tool_meta = meta
        return func

    return decorator


def auto_register_tools(func_list: list[Union[ToolFunc, AsyncToolFunc]]):
    """Register every function carrying tool_meta."""
    for func in func_list:
        meta = getattr(func, "tool_meta", None)
        if meta is None:
            raise ValueError(f"{func!r} has no tool_meta")
        register_tool(meta=meta, func=func)


def text_result(document: Any) -> list[types.TextContent]:
    """JSON text content; float reprs keep full precision."""
    if isinstance(document, str):
        return [types.TextContent(type="text", text=document)]
    return [types.TextContent(type="text", text=json.dumps(document))]


async def call_tool(name: str, arguments: dict) -> ToolResult:
    if (entry := _all_tools.get(name)) is None:
        raise ValueError(f"Tool {name} not found")
    # None values would fail schema validation
    return await entry.invoke({k: v for k, v in (arguments or {}).items() if v is not None})


def reset() -> None:
    """Forget every registered tool."""
    _all_tools.clear()


__all__ = [
    "all_tools",
    "register_tool",
    "call_tool",
    "tool_meta",
    "auto_register_tools",
    "text_result",
    "reset",
]
