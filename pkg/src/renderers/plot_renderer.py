"""SVG figures built from the means and ECDF tables.

Plots are a thin layer over the CSVs: they read nothing else. Rendering is
deterministic (Agg backend, fixed SVG hash salt, no date metadata).
"""

import logging
from collections import OrderedDict
from pathlib import Path
from typing import List, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from src.colors import get_initial_style  # noqa: E402
from src.exceptions import CsvFormatError  # noqa: E402
from src.renderers.csv_tables import EcdfRow, MeanRow, read_rows  # noqa: E402

logger = logging.getLogger(__name__)

SVG_HASH_SALT = "temsp"
FIGURE_SIZE = (6.4, 4.0)


def _group(rows, key) -> "OrderedDict":
    groups: "OrderedDict" = OrderedDict()
    for row in rows:
        groups.setdefault(key(row), []).append(row)
    return groups


def _plot_series(axes, xs: Sequence[float], ys: Sequence[float], initial: str, position: int):
    color, style = get_initial_style(initial, position)
    if len(xs) == 1:
        return axes.plot(xs, ys, marker="o", linestyle="none", color=color, label=initial)
    return axes.plot(xs, ys, linestyle=style, color=color, label=initial)


def build_means_figure(rows: Sequence[MeanRow], psi: str, dt: float) -> Figure:
    """One panel of psi means against time, a polyline per initial datum."""
    figure = Figure(figsize=FIGURE_SIZE)
    axes = figure.add_subplot()
    selected = [row for row in rows if row.psi == psi and row.dt == dt]
    for position, (initial, series) in enumerate(_group(selected, lambda r: r.initial).items()):
        series = sorted(series, key=lambda r: r.t)
        _plot_series(axes, [r.t for r in series], [r.mean for r in series], initial, position)
    axes.set_xlabel("t")
    axes.set_ylabel(f"mean of {psi}")
    axes.set_title(f"{psi}, dt={dt:g}")
    axes.legend()
    return figure


def build_ecdf_figure(rows: Sequence[EcdfRow], psi: str, dt: float) -> Figure:
    """One panel of psi ECDFs, a step curve per initial datum."""
    figure = Figure(figsize=FIGURE_SIZE)
    axes = figure.add_subplot()
    selected = [row for row in rows if row.psi == psi and row.dt == dt]
    for position, (initial, series) in enumerate(_group(selected, lambda r: r.initial).items()):
        series = sorted(series, key=lambda r: r.value)
        xs = [r.value for r in series]
        ys = [r.cdf for r in series]
        if len(xs) == 1:
            _plot_series(axes, xs, ys, initial, position)
            continue
        color, style = get_initial_style(initial, position)
        axes.step(xs, ys, where="post", linestyle=style, color=color, label=initial)
    axes.set_xlabel(psi)
    axes.set_ylabel("empirical CDF")
    axes.set_ylim(-0.02, 1.02)
    axes.set_title(f"{psi}, dt={dt:g}")
    axes.legend()
    return figure


def save_svg(figure: Figure, path: Path) -> Path:
    """Write a figure as SVG with reproducible bytes."""
    with plt.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
        figure.savefig(path, format="svg", metadata={"Date": None})
    return path


def _panels(rows) -> List[Tuple[str, float]]:
    return list(_group(rows, lambda r: (r.psi, r.dt)).keys())


def emit_plots(means_csv, ecdf_csv, out_dir) -> List[Path]:
    """Render one means figure and one ECDF figure per (psi, dt).

    Returns:
        Paths of the written SVG files

    Raises:
        CsvFormatError: If either table is malformed or has no data rows
    """
    means = read_rows(means_csv, MeanRow)
    ecdf = read_rows(ecdf_csv, EcdfRow)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    for psi, dt in _panels(means):
        stem = f"means_{psi}_dt{dt:g}"
        written.append(save_svg(build_means_figure(means, psi, dt), out_dir / f"{stem}.svg"))
    for psi, dt in _panels(ecdf):
        stem = f"ecdf_{psi}_dt{dt:g}"
        written.append(save_svg(build_ecdf_figure(ecdf, psi, dt), out_dir / f"{stem}.svg"))
    if not written:
        raise CsvFormatError(str(means_csv), 2, "nothing to plot")
    logger.info("Wrote %d figures to %s", len(written), out_dir)
    return written
