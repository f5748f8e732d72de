"""
kaon-bell command line.

    kaon-bell effop        --alpha A --phi P --time T   one effective operator
    kaon-bell witness      --tau T                      one witness point with singlet trace
    kaon-bell scan-tau                                  witness extremes over the tau grid
    kaon-bell scan-epsilon                              most violating tau per epsilon
    kaon-bell lifetime                                  violation lifetime per epsilon
    kaon-bell ion-compare                               Yb172 vs Yb171 SCG lifetimes

Exit codes: 0 success, 2 configuration error, 1 any other failure.
"""

import argparse
import logging
import os
import sys
from typing import Dict, Optional, Sequence

import numpy as np

from kaon_bell import __version__
from kaon_bell.config import OutputFormat, RunConfig, read_config
from kaon_bell.errors import ConfigError, KaonBellError
from kaon_bell.output import (
    emit_csv,
    emit_ion_csv,
    emit_lifetime_csv,
    emit_plotdata,
    emit_svg,
    ion_series,
    lifetime_series,
    peak_series,
    scan_series,
)
from kaon_bell.runner import run, run_effop, run_ion_compare, run_lifetimes, run_max_violation, run_point

logger = logging.getLogger(__name__)

# flag dest -> (section, key)
OVERRIDES = {
    "system": ("system", "kind"),
    "epsilon": ("system", "epsilon"),
    "omega": ("system", "omega"),
    "mode": ("system", "mode"),
    "witness": ("witness", "kind"),
    "schedule": ("witness", "schedule"),
    "tau_start": ("scan", "tau_start"),
    "tau_stop": ("scan", "tau_stop"),
    "tau_steps": ("scan", "tau_steps"),
    "epsilons": ("scan", "epsilons"),
    "workers": ("scan", "workers"),
    "trotter_dt": ("trotter", "dt"),
    "trotter_order": ("trotter", "order"),
    "output": ("output", "path"),
    "format": ("output", "format"),
}


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        default=os.getenv("KAON_BELL_CONFIG"),
        help="INI configuration file",
    )
    common.add_argument(
        "--log-level",
        default=os.getenv("KAON_BELL_LOG_LEVEL", "INFO"),
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        type=str.upper,
        help="Logging level (logs go to stderr)",
    )
    common.add_argument("--system", choices=["kaon", "yb171", "yb172"], help="Decaying system")
    common.add_argument("--epsilon", help="CP-violation parameter")
    common.add_argument("--omega", help="Oscillation frequency in 1/ns")
    common.add_argument("--mode", choices=["analytic", "lindblad"], help="Evolution mode")
    common.add_argument("--witness", choices=["chsh", "scg"], help="Bell witness")
    common.add_argument("--schedule", help="Named measurement schedule")
    common.add_argument("--tau-start", help="First tau in ns")
    common.add_argument("--tau-stop", help="Last tau in ns")
    common.add_argument("--tau-steps", help="Number of tau points")
    common.add_argument("--epsilons", help="Comma-separated epsilon list")
    common.add_argument("--workers", help="Concurrent scan workers")
    common.add_argument("--trotter-dt", help="Trotter step in ns (ion systems)")
    common.add_argument("--trotter-order", choices=["1", "2"], help="Trotter splitting order (ion systems)")
    common.add_argument("--output", help="Output path ('-' for stdout)")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], help="Output format")
    common.add_argument("--with-trace", action="store_true", help="Add the singlet trace column")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="kaon-bell", description="Bell-inequality analysis for decaying kaon pairs")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    effop = sub.add_parser("effop", parents=[common], help="Print one effective operator")
    effop.add_argument("--alpha", type=float, default=np.pi / 2, help="Quasi-spin polar angle")
    effop.add_argument("--phi", type=float, default=np.pi, help="Quasi-spin phase")
    effop.add_argument("--time", type=float, default=0.0, help="Measurement time in ns")

    witness = sub.add_parser("witness", parents=[common], help="Evaluate the witness at one tau")
    witness.add_argument("--tau", type=float, default=0.0, help="Schedule parameter in ns")

    sub.add_parser("scan-tau", parents=[common], help="Witness extremes over the tau grid")
    sub.add_parser("scan-epsilon", parents=[common], help="Most violating tau per epsilon")
    sub.add_parser("lifetime", parents=[common], help="Violation lifetime per epsilon")
    sub.add_parser("ion-compare", parents=[common], help="Dephasing impact on ion lifetimes")
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Dict[str, str]]:
    overrides: Dict[str, Dict[str, str]] = {}
    for dest, (section, key) in OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides.setdefault(section, {})[key] = str(value)
    if getattr(args, "with_trace", False):
        overrides.setdefault("witness", {})["with_trace"] = "true"
    return overrides


def _emit(config: RunConfig, series, write_csv) -> None:
    fmt, path = config.output.format, config.output.path
    if fmt is OutputFormat.CSV:
        write_csv(path)
    elif fmt is OutputFormat.PLOTDATA:
        emit_plotdata(series, path)
    else:
        emit_svg(series, path)


def format_matrix(matrix: np.ndarray) -> str:
    return "\n".join(" ".join(repr(complex(v)) for v in row) for row in matrix) + "\n"


def execute(command: str, config: RunConfig, args: argparse.Namespace) -> None:
    if command == "effop":
        op = run_effop(config, args.alpha, args.phi, args.time)
        sys.stdout.write(format_matrix(op.matrix))
    elif command == "witness":
        row = run_point(config, args.tau)
        _emit(config, scan_series([row]), lambda path: emit_csv([row], path))
    elif command == "scan-tau":
        rows = run(config)
        _emit(config, scan_series(rows), lambda path: emit_csv(rows, path))
    elif command == "scan-epsilon":
        rows = run_max_violation(config)
        _emit(config, peak_series(rows), lambda path: emit_csv(rows, path))
    elif command == "lifetime":
        rows = run_lifetimes(config)
        _emit(config, lifetime_series(rows), lambda path: emit_lifetime_csv(rows, path))
    elif command == "ion-compare":
        rows = run_ion_compare(config)
        _emit(config, ion_series(rows), lambda path: emit_ion_csv(rows, path))
    else:
        raise KaonBellError(f"Unknown command: {command}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), stream=sys.stderr)

    try:
        config = read_config(args.config, overrides_from_args(args))
    except ConfigError as e:
        for path, message in e.diagnostics:
            logger.error(f"❌ {path}: {message}")
        return 2

    logger.info(f"🚀 Running {args.command} ({config.witness_kind.value}, {config.schedule().name})")
    try:
        execute(args.command, config, args)
    except (KaonBellError, ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
        logger.error(f"❌ {args.command} failed: {e}")
        return 1
    logger.info(f"✅ {args.command} done")
    return 0


if __name__ == "__main__":
    sys.exit(main())
