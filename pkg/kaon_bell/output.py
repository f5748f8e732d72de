"""
Result emitters: CSV, gnuplot-style plot data and an optional SVG line plot.

Floats are written as the shortest decimal that round-trips (``repr``).
"""

import csv
import io
import logging
import sys
from contextlib import contextmanager
from typing import IO, Iterator, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict

from kaon_bell.bell import WitnessKind
from kaon_bell.errors import OutputError
from kaon_bell.ionsim import LifetimeComparison
from kaon_bell.runner import LifetimeRow, ScanRow

logger = logging.getLogger(__name__)

SCAN_HEADER = ("epsilon", "tau_ns", "lambda_min", "lambda_max", "trace_value", "bound", "violated")
LIFETIME_HEADER = ("epsilon", "lifetime_ns")
ION_HEADER = ("epsilon", "lifetime_pure_decay_ns", "lifetime_with_dephasing_ns")

# Lifetimes are plotted in units of 10 ns
LIFETIME_UNIT_NS = 10.0


class Series(BaseModel):
    """One named (x, y) curve."""

    model_config = ConfigDict(frozen=True)

    name: str
    points: Tuple[Tuple[float, float], ...]
    x_label: str = "x"
    y_label: str = "y"


def fmt(value: Optional[float]) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(float(value))


@contextmanager
def _open(path: Optional[str], binary: bool = False) -> Iterator[IO]:
    if path in (None, "", "-"):
        yield sys.stdout.buffer if binary else sys.stdout
        return
    try:
        if binary:
            with open(path, "wb") as fh:
                yield fh
        else:
            with open(path, "w", newline="", encoding="utf-8") as fh:
                yield fh
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e.strerror or e}") from e


def _write_table(header: Sequence[str], records: Sequence[Sequence[str]], path: Optional[str]) -> None:
    with _open(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(records)


def _require_rows(rows: Sequence) -> None:
    if not rows:
        raise OutputError("Nothing to emit: no rows")


def emit_csv(rows: Sequence[ScanRow], path: Optional[str] = None) -> None:
    _require_rows(rows)
    _write_table(
        SCAN_HEADER,
        [
            (fmt(r.epsilon), fmt(r.tau_ns), fmt(r.lambda_min), fmt(r.lambda_max), fmt(r.trace_value), fmt(r.bound), fmt(r.violated))
            for r in rows
        ],
        path,
    )
    logger.info(f"Wrote {len(rows)} rows to {path or 'stdout'}")


def emit_lifetime_csv(rows: Sequence[LifetimeRow], path: Optional[str] = None) -> None:
    _require_rows(rows)
    _write_table(LIFETIME_HEADER, [(fmt(r.epsilon), fmt(r.lifetime_ns)) for r in rows], path)


def emit_ion_csv(rows: Sequence[LifetimeComparison], path: Optional[str] = None) -> None:
    _require_rows(rows)
    _write_table(
        ION_HEADER,
        [(fmt(r.epsilon), fmt(r.lifetime_pure_decay), fmt(r.lifetime_with_dephasing)) for r in rows],
        path,
    )


def scan_series(rows: Sequence[ScanRow]) -> List[Series]:
    """lambda_min, lambda_max (and trace, when present) against tau, one set per epsilon."""
    series = []
    epsilons = list(dict.fromkeys(r.epsilon for r in rows))
    for epsilon in epsilons:
        subset = [r for r in rows if r.epsilon == epsilon]
        columns = [("lambda_min", lambda r: r.lambda_min), ("lambda_max", lambda r: r.lambda_max)]
        if all(r.trace_value is not None for r in subset):
            columns.append(("trace", lambda r: r.trace_value))
        for label, get in columns:
            series.append(
                Series(
                    name=f"epsilon={fmt(epsilon)} {label}",
                    points=tuple((r.tau_ns, get(r)) for r in subset),
                    x_label="tau [ns]",
                    y_label="eigenvalue",
                )
            )
    return series


def peak_series(rows: Sequence[ScanRow]) -> List[Series]:
    """Extreme eigenvalue against epsilon (lambda_max for CHSH, lambda_min for SCG)."""
    return [
        Series(
            name="extreme eigenvalue",
            points=tuple((r.epsilon, r.lambda_max if r.witness is WitnessKind.CHSH else r.lambda_min) for r in rows),
            x_label="epsilon",
            y_label="eigenvalue",
        )
    ]


def lifetime_series(rows: Sequence[LifetimeRow]) -> List[Series]:
    return [
        Series(
            name="violation lifetime",
            points=tuple((r.epsilon, r.lifetime_ns / LIFETIME_UNIT_NS) for r in rows),
            x_label="epsilon",
            y_label="lifetime [10 ns]",
        )
    ]


def ion_series(rows: Sequence[LifetimeComparison]) -> List[Series]:
    return [
        Series(
            name=name,
            points=tuple((r.epsilon, get(r) / LIFETIME_UNIT_NS) for r in rows),
            x_label="epsilon",
            y_label="lifetime [10 ns]",
        )
        for name, get in (
            ("pure decay", lambda r: r.lifetime_pure_decay),
            ("decay + dephasing", lambda r: r.lifetime_with_dephasing),
        )
    ]


def render_plotdata(series: Sequence[Series]) -> str:
    """Two-column blocks, one per series, separated by two blank lines (gnuplot ``index``)."""
    blocks = []
    for s in series:
        lines = [f"# {s.name}", f"# {s.x_label} {s.y_label}"]
        lines.extend(f"{fmt(x)} {fmt(y)}" for x, y in s.points)
        blocks.append("\n".join(lines) + "\n")
    return "\n\n".join(blocks)


def emit_plotdata(series: Sequence[Series], path: Optional[str] = None) -> None:
    _require_rows(series)
    with _open(path) as fh:
        fh.write(render_plotdata(series))


def render_svg(series: Sequence[Series], title: str = "") -> bytes:
    """A self-contained SVG line plot; identical input gives identical bytes."""
    try:
        import matplotlib
    except ImportError as e:
        raise OutputError("SVG output needs matplotlib (install the 'plot' extra)") from e
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "kaon-bell"
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    try:
        for s in series:
            xs = [p[0] for p in s.points]
            ys = [p[1] for p in s.points]
            ax.plot(xs, ys, label=s.name)
        if series:
            ax.set_xlabel(series[0].x_label)
            ax.set_ylabel(series[0].y_label)
        if title:
            ax.set_title(title)
        ax.legend(fontsize="small")
        buffer = io.BytesIO()
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    return buffer.getvalue()


def emit_svg(series: Sequence[Series], path: Optional[str] = None, title: str = "") -> None:
    _require_rows(series)
    data = render_svg(series, title)
    with _open(path, binary=True) as fh:
        fh.write(data)
