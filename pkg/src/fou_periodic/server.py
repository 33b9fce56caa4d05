"""
fou-periodic MCP server

Model Context Protocol server exposing drift functionals, limit-law
constants, seeded simulation with estimation and limit-law sampling.
"""

import argparse
import asyncio
import logging
import sys
from typing import Any

from mcp.server import Server
from mcp.server.stdio import stdio_server
from mcp.types import TextContent, Tool

from fou_periodic.config import load_environment
from fou_periodic.errors import FouError
from fou_periodic.tools import get_all_tools, get_handler
from fou_periodic.utils import format_error, format_result

logger = logging.getLogger(__name__)


def _parse_args() -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        description="MCP server for fOU simulation and drift estimation"
    )
    parser.add_argument(
        "--env-file",
        type=str,
        help="Path to .env file",
    )
    return parser.parse_args()


# Initialize MCP server
server = Server("fou-periodic")


# =============================================================================
# Tool Handlers
# =============================================================================


@server.list_tools()
async def list_tools() -> list[Tool]:
    """List available tools."""
    return get_all_tools()


@server.call_tool()
async def call_tool(name: str, arguments: dict[str, Any]) -> list[TextContent]:
    """Handle tool calls by dispatching to registered handlers."""
    try:
        tool_def = get_handler(name)
        if tool_def is None:
            raise ValueError(f"Unknown tool: {name}")
        result = await tool_def.handler(arguments or {})
        return [TextContent(type="text", text=format_result(result))]
    except Exception as e:
        if not isinstance(e, FouError):
            logger.exception("Tool %s failed", name)
        return [TextContent(type="text", text=format_error(e))]


__all__ = ["format_error", "format_result", "server", "main"]


# =============================================================================
# Server Entry Point
# =============================================================================


def main() -> None:
    """Main entry point for the MCP server."""
    args = _parse_args()
    logging.basicConfig(stream=sys.stderr, level=logging.INFO)
    try:
        load_environment(args.env_file)
    except FouError as e:
        print(f"Error: {e.message}", file=sys.stderr)
        sys.exit(e.exit_code)

    asyncio.run(_run_server())


async def _run_server() -> None:
    """Run the MCP server."""
    async with stdio_server() as (read_stream, write_stream):
        await server.run(
            read_stream,
            write_stream,
            server.create_initialization_options(),
        )


if __name__ == "__main__":
    main()
