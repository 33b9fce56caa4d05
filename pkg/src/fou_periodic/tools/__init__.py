"""
MCP tools for fou-periodic.

Import this module to register all tools with the registry.
"""

# Import all tool modules to trigger registration
from fou_periodic.tools import limits, model, simulation

# Re-export registry functions for convenience
from fou_periodic.tools.base import get_all_tool_names, get_all_tools, get_handler

__all__ = [
    "get_all_tools",
    "get_handler",
    "get_all_tool_names",
    # Tool modules
    "model",
    "simulation",
    "limits",
]
