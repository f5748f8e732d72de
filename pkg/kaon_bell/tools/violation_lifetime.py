from typing import List, Optional

from mcp.server.fastmcp import FastMCP

from kaon_bell.runner import LifetimeRow, run_lifetimes
from kaon_bell.session import KaonBellSession


def format_lifetimes(rows: List[LifetimeRow], title: str) -> str:
    result = f"⏱️ **{title}:**\n\n"
    for row in rows:
        if row.lifetime_ns == 0.0:
            result += f"• **epsilon {row.epsilon}**: never violated\n"
        else:
            result += f"• **epsilon {row.epsilon}**: {row.lifetime_ns:.4f} ns ({row.lifetime_ns / 10.0:.4f} x 10 ns)\n"
    return result


def create_violation_lifetime_tool(mcp: FastMCP, session: KaonBellSession) -> None:

    @mcp.tool()
    def violation_lifetime(
        epsilons: str = "0",
        witness: Optional[str] = None,
        schedule: Optional[str] = None,
        system: Optional[str] = None,
    ) -> str:
        """
        Compute how long (largest tau) a Bell witness stays violated, per epsilon
        Args:
            - epsilons: Comma-separated epsilon values (default: "0")
            - witness: 'chsh' or 'scg' (optional)
            - schedule: Named schedule (optional)
            - system: 'kaon', 'yb171' or 'yb172' (optional)
        """
        try:
            config = session.configure(
                system={"kind": system},
                witness={"kind": witness, "schedule": schedule},
                scan={"epsilons": epsilons},
            )
            title = f"{config.witness_kind.value.upper()} violation lifetimes ({config.system.kind.value})"
            return format_lifetimes(run_lifetimes(config), title)
        except Exception as e:
            raise Exception(f"Error computing violation lifetime: {e}")
