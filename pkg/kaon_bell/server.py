"""
kaon-bell MCP server - exposes effective-operator and Bell-witness analyses to AI models.
"""

import argparse
import logging
import os
import sys

from mcp.server.fastmcp import FastMCP

from kaon_bell.errors import ConfigError
from kaon_bell.session import KaonBellSession
from kaon_bell.tools import register_all_tools

logger = logging.getLogger(__name__)


def parse_args(argv=None):
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(description="kaon-bell MCP server")
    parser.add_argument(
        "--config",
        default=os.getenv("KAON_BELL_CONFIG"),
        help="INI configuration file with the base run parameters",
    )
    parser.add_argument(
        "--mcp-mode",
        choices=["stdio", "streamable-http"],
        default=os.getenv("MCP_MODE", "stdio"),
        help="MCP server mode",
    )
    parser.add_argument(
        "--log-level",
        default=os.getenv("KAON_BELL_LOG_LEVEL", "INFO"),
        type=str.upper,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level",
    )
    return parser.parse_args(argv)


def create_server(session: KaonBellSession) -> FastMCP:
    mcp = FastMCP("kaon-bell", host="0.0.0.0", stateless_http=True)
    register_all_tools(mcp, session)
    return mcp


def run_server(argv=None):
    """Run the MCP server."""
    args = parse_args(argv)
    # stdout carries the MCP protocol
    logging.basicConfig(level=getattr(logging, args.log_level), stream=sys.stderr)

    try:
        session = KaonBellSession(config_path=args.config)
    except ConfigError as e:
        logger.error(f"❌ Invalid configuration: {e}")
        sys.exit(2)

    mcp = create_server(session)

    logger.info("🚀 Starting kaon-bell MCP server...")
    logger.info(f"Config: {session.config_path or 'built-in defaults'}")
    logger.info(f"Witness: {session.base.witness_kind.value} / {session.base.schedule().name}")

    try:
        if args.mcp_mode == "stdio":
            mcp.run(transport="stdio")
        elif args.mcp_mode == "streamable-http":
            mcp.run(transport="streamable-http")
        else:
            logger.error(f"❌ Unknown MCP mode: {args.mcp_mode}")
    except Exception as e:
        logger.error(f"❌ Error running MCP server: {e}")


def main():
    """Entry point for setuptools."""
    run_server()


if __name__ == "__main__":
    main()
