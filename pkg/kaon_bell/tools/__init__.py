from mcp.server.fastmcp import FastMCP
from kaon_bell.session import KaonBellSession

# Import all tool creation functions
from .effective_operator import create_effective_operator_tool
from .evaluate_witness import create_evaluate_witness_tool
from .scan_tau import create_scan_tau_tool
from .max_violation import create_max_violation_tool
from .violation_lifetime import create_violation_lifetime_tool
from .compare_ion_lifetimes import create_compare_ion_lifetimes_tool
from .show_config import create_show_config_tool

# Export all tool creation functions
__all__ = [
    "create_effective_operator_tool",
    "create_evaluate_witness_tool",
    "create_scan_tau_tool",
    "create_max_violation_tool",
    "create_violation_lifetime_tool",
    "create_compare_ion_lifetimes_tool",
    "create_show_config_tool",
    "register_all_tools",
]


def register_all_tools(mcp: FastMCP, session: KaonBellSession) -> None:
    """Register all kaon-bell tools with the FastMCP server."""
    create_effective_operator_tool(mcp, session)
    create_evaluate_witness_tool(mcp, session)
    create_scan_tau_tool(mcp, session)
    create_max_violation_tool(mcp, session)
    create_violation_lifetime_tool(mcp, session)
    create_compare_ion_lifetimes_tool(mcp, session)
    create_show_config_tool(mcp, session)
