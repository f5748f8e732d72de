from typing import Optional

from mcp.server.fastmcp import FastMCP

from kaon_bell.runner import run_max_violation
from kaon_bell.session import KaonBellSession
from kaon_bell.tools.scan_tau import format_rows


def create_max_violation_tool(mcp: FastMCP, session: KaonBellSession) -> None:

    @mcp.tool()
    def max_violation(
        epsilons: str = "0",
        witness: Optional[str] = None,
        schedule: Optional[str] = None,
        tau_stop: float = 2.0,
    ) -> str:
        """
        Find the most violating tau for each epsilon
        Args:
            - epsilons: Comma-separated epsilon values (default: "0")
            - witness: 'chsh' or 'scg' (optional)
            - schedule: Named schedule (optional)
            - tau_stop: End of the searched tau window in ns (default: 2)
        """
        try:
            config = session.configure(
                witness={"kind": witness, "schedule": schedule},
                scan={"epsilons": epsilons, "tau_start": 0.0, "tau_stop": tau_stop, "tau_steps": 401},
            )
            title = f"Maximal {config.witness_kind.value.upper()} violation ({config.schedule().name})"
            return format_rows(run_max_violation(config), title)
        except Exception as e:
            raise Exception(f"Error finding maximal violation: {e}")
