from typing import Optional

from mcp.server.fastmcp import FastMCP

from kaon_bell.runner import ScanRow, run_point
from kaon_bell.session import KaonBellSession


def format_point(row: ScanRow, schedule: str) -> str:
    verdict = "🔔 **Violated**" if row.violated else "➖ Not violated"
    result = f"📐 **{row.witness.value.upper()} witness ({schedule}) at tau = {row.tau_ns} ns:**\n\n"
    result += f"• **epsilon**: {row.epsilon}\n"
    result += f"• **lambda_min**: {row.lambda_min:.6f}\n"
    result += f"• **lambda_max**: {row.lambda_max:.6f}\n"
    if row.trace_value is not None:
        result += f"• **Tr(W rho_singlet)**: {row.trace_value:.6f}\n"
    result += f"• **Classical bound**: {row.bound}\n"
    result += f"• **Result**: {verdict}\n"
    return result


def create_evaluate_witness_tool(mcp: FastMCP, session: KaonBellSession) -> None:

    @mcp.tool()
    def evaluate_witness(
        tau: float,
        epsilon: Optional[float] = None,
        witness: Optional[str] = None,
        schedule: Optional[str] = None,
        mode: Optional[str] = None,
    ) -> str:
        """
        Evaluate a CHSH or SCG witness at one schedule parameter tau
        Args:
            - tau: Schedule parameter in ns
            - epsilon: CP-violation parameter (optional)
            - witness: 'chsh' or 'scg' (optional)
            - schedule: Named schedule such as 'standard-chsh' or 'standard-scg' (optional)
            - mode: 'analytic' or 'lindblad' (optional)
        """
        try:
            config = session.configure(
                system={"epsilon": epsilon, "mode": mode},
                witness={"kind": witness, "schedule": schedule},
            )
            return format_point(run_point(config, tau), config.schedule().name)
        except Exception as e:
            raise Exception(f"Error evaluating witness: {e}")
