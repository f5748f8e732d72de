from typing import List, Optional

from mcp.server.fastmcp import FastMCP

from kaon_bell.runner import ScanRow, run
from kaon_bell.session import KaonBellSession


def format_rows(rows: List[ScanRow], title: str) -> str:
    result = f"📊 **{title}:**\n\n"
    result += "| epsilon | tau [ns] | lambda_min | lambda_max | violated |\n"
    result += "|---|---|---|---|---|\n"
    for row in rows:
        mark = "✅" if row.violated else ""
        result += f"| {row.epsilon} | {row.tau_ns:.5f} | {row.lambda_min:.6f} | {row.lambda_max:.6f} | {mark} |\n"
    violating = sum(r.violated for r in rows)
    result += f"\n{violating} of {len(rows)} points violate the classical bound.\n"
    return result


def create_scan_tau_tool(mcp: FastMCP, session: KaonBellSession) -> None:

    @mcp.tool()
    def scan_tau(
        tau_start: float = 0.0,
        tau_stop: float = 0.5,
        tau_steps: int = 11,
        epsilon: Optional[float] = None,
        witness: Optional[str] = None,
        schedule: Optional[str] = None,
    ) -> str:
        """
        Scan witness eigenvalue extremes over a tau grid
        Args:
            - tau_start: First tau in ns (default: 0)
            - tau_stop: Last tau in ns (default: 0.5)
            - tau_steps: Number of grid points (default: 11)
            - epsilon: CP-violation parameter (optional)
            - witness: 'chsh' or 'scg' (optional)
            - schedule: Named schedule (optional)
        """
        try:
            config = session.configure(
                system={"epsilon": epsilon},
                witness={"kind": witness, "schedule": schedule},
                scan={"tau_start": tau_start, "tau_stop": tau_stop, "tau_steps": tau_steps},
            )
            title = f"{config.witness_kind.value.upper()} scan ({config.schedule().name})"
            return format_rows(run(config), title)
        except Exception as e:
            raise Exception(f"Error scanning tau: {e}")
