from mcp.server.fastmcp import FastMCP

from kaon_bell.config import describe
from kaon_bell.session import KaonBellSession


def create_show_config_tool(mcp: FastMCP, session: KaonBellSession) -> None:

    @mcp.tool()
    def show_config() -> str:
        """
        Show the session's base run configuration
        """
        try:
            result = "⚙️ **Run configuration:**\n\n"
            for section, values in describe(session.base).items():
                if values is None:
                    continue
                result += f"**[{section}]**\n"
                for key, value in values.items():
                    result += f"• **{key}**: {value}\n"
                result += "\n"
            return result
        except Exception as e:
            raise Exception(f"Error reading configuration: {e}")
