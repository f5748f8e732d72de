from typing import Optional

import numpy as np
from mcp.server.fastmcp import FastMCP

from kaon_bell.effop import EffectiveOperator
from kaon_bell.numkernel import eig_hermitian
from kaon_bell.runner import run_effop
from kaon_bell.session import KaonBellSession


def format_operator(op: EffectiveOperator) -> str:
    setting = op.setting
    result = "🧮 **Effective operator O = 2K(t) - 1:**\n\n"
    if setting.direction is not None:
        result += f"• **Quasi-spin**: alpha={setting.direction.alpha:.6f}, phi={setting.direction.phi:.6f}\n"
    result += f"• **Time**: {setting.time} ns\n"
    result += f"• **Mode**: {setting.mode.value} ({op.dim} levels)\n"
    eigenvalues = eig_hermitian(op.matrix).eigenvalues
    result += f"• **Eigenvalues**: {', '.join(f'{v:.6f}' for v in eigenvalues)}\n\n"
    result += "```\n"
    for row in op.matrix:
        result += "  ".join(f"{v.real:+.6f}{v.imag:+.6f}j" for v in row) + "\n"
    result += "```\n"
    return result


def create_effective_operator_tool(mcp: FastMCP, session: KaonBellSession) -> None:

    @mcp.tool()
    def effective_operator(
        alpha: float = float(np.pi / 2),
        phi: float = float(np.pi),
        time: float = 0.0,
        epsilon: Optional[float] = None,
        mode: Optional[str] = None,
        system: Optional[str] = None,
    ) -> str:
        """
        Compute the effective measurement operator for one quasi-spin direction and time
        Args:
            - alpha: Quasi-spin polar angle in radians, 0 = K_S, pi = K_L (default: pi/2)
            - phi: Quasi-spin phase in radians (default: pi, which gives K0bar)
            - time: Measurement time in ns (default: 0)
            - epsilon: CP-violation parameter (optional, uses the session value)
            - mode: 'analytic' or 'lindblad' (optional)
            - system: 'kaon', 'yb171' or 'yb172' (optional)
        """
        try:
            config = session.configure(system={"epsilon": epsilon, "mode": mode, "kind": system})
            return format_operator(run_effop(config, alpha, phi, time))
        except Exception as e:
            raise Exception(f"Error computing effective operator: {e}")
