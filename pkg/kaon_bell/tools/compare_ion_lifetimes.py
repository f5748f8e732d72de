from typing import List, Optional

from mcp.server.fastmcp import FastMCP

from kaon_bell.ionsim import LifetimeComparison
from kaon_bell.runner import run_ion_compare
from kaon_bell.session import KaonBellSession


def format_comparison(rows: List[LifetimeComparison]) -> str:
    result = "⚛️ **SCG violation lifetimes, 172Yb+ (pure decay) vs 171Yb+ (decay + dephasing):**\n\n"
    result += "| epsilon | pure decay [ns] | with dephasing [ns] | difference |\n"
    result += "|---|---|---|---|\n"
    for row in rows:
        result += (
            f"| {row.epsilon} | {row.lifetime_pure_decay:.4f} | {row.lifetime_with_dephasing:.4f} "
            f"| {100.0 * row.relative_difference:.1f}% |\n"
        )
    return result


def create_compare_ion_lifetimes_tool(mcp: FastMCP, session: KaonBellSession) -> None:

    @mcp.tool()
    def compare_ion_lifetimes(
        epsilons: str = "0, 0.01, 0.02",
        gamma_S: Optional[float] = None,
        omega: Optional[float] = None,
    ) -> str:
        """
        Compare SCG violation lifetimes of the two trapped-ion decay models
        Args:
            - epsilons: Comma-separated epsilon values (default: "0, 0.01, 0.02")
            - gamma_S: Decay rate in 1/ns (optional, kaon value by default)
            - omega: Oscillation frequency in 1/ns (optional)
        """
        try:
            config = session.configure(
                system={"kind": "yb172", "mode": "lindblad", "gamma_S": gamma_S, "omega": omega},
                witness={"kind": "scg", "schedule": "standard-scg"},
                scan={"epsilons": epsilons},
            )
            return format_comparison(run_ion_compare(config))
        except Exception as e:
            raise Exception(f"Error comparing ion lifetimes: {e}")
