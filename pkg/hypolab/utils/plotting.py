"""
SVG emission for experiment tables.
"""

import io
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from hypolab.core.logging import logger  # noqa: E402
from hypolab.utils.serialization import PathLike, write_bytes_atomic  # noqa: E402

# Fixed element ids, no timestamp and text kept as text: identical tables give identical files.
matplotlib.rcParams["svg.hashsalt"] = "hypolab"
matplotlib.rcParams["svg.fonttype"] = "none"

Table = Union[pd.DataFrame, Mapping[str, Sequence[float]]]


class PlotKind(str, Enum):
    LOGLOG = "loglog"
    LINE = "line"
    HEATMAP = "heatmap"


def _frame(table: Table) -> pd.DataFrame:
    frame = table if isinstance(table, pd.DataFrame) else pd.DataFrame(dict(table))
    if frame.shape[1] == 0 or frame.shape[0] == 0:
        raise ValueError("cannot plot an empty table")
    return frame


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log y against log x over the positive pairs."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    if keep.sum() < 2:
        raise ValueError("a log-log slope needs at least two positive points")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def emit_plot(
    table: Table,
    kind: Union[PlotKind, str],
    path: PathLike,
    x: Optional[str] = None,
    y: Optional[Sequence[str]] = None,
    title: Optional[str] = None,
) -> Path:
    """
    Write a table as a self-contained SVG.

    Args:
        table: Equal-length columns of reals
        kind: loglog (with a fitted-slope annotation per series), line, or
            heatmap (long-format columns x, y, value on a regular grid)
        path: Target .svg file
        x: Abscissa column (defaults to the first)
        y: Ordinate columns (defaults to all others)
        title: Optional axes title

    Returns:
        The written path

    Raises:
        ValueError: If the table is empty
    """
    kind = PlotKind(kind)
    frame = _frame(table)
    x = x or frame.columns[0]

    if kind == PlotKind.HEATMAP:
        fig = _heatmap(frame, x, y)
    else:
        fig, ax = plt.subplots(figsize=(6.0, 4.5))
        series = list(y) if y else [c for c in frame.columns if c != x]
        for column in series:
            label = column
            if kind == PlotKind.LOGLOG:
                label = f"{column} (slope {loglog_slope(frame[x], frame[column]):.3f})"
            ax.plot(frame[x], frame[column], marker="o", label=label)
        if kind == PlotKind.LOGLOG:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel(x)
        ax.legend()
        ax.grid(True, which="both", alpha=0.3)
        if title:
            ax.set_title(title)

    buffer = io.BytesIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None})
    plt.close(fig)
    written = write_bytes_atomic(buffer.getvalue(), path)
    logger.debug(f"emit_plot {kind.value}: {written}")
    return written


def _heatmap(frame: pd.DataFrame, x: str, y: Optional[Sequence[str]]):
    columns = [c for c in frame.columns if c != x]
    y_col, value_col = (list(y) + columns)[:2] if y else columns[:2]
    grid = frame.pivot(index=y_col, columns=x, values=value_col).sort_index().sort_index(axis=1)
    xs, ys = grid.columns.to_numpy(dtype=float), grid.index.to_numpy(dtype=float)
    width, height = float(np.ptp(xs)) or 1.0, float(np.ptp(ys)) or 1.0
    fig, ax = plt.subplots(figsize=(6.0, 6.0 * height / width))
    mesh = ax.pcolormesh(xs, ys, grid.to_numpy(dtype=float), shading="nearest")
    ax.set_aspect("equal")
    ax.set_xlabel(x)
    ax.set_ylabel(y_col)
    fig.colorbar(mesh, ax=ax, label=value_col)
    return fig


def field_table(values: np.ndarray, x_nodes: np.ndarray, y_nodes: np.ndarray) -> pd.DataFrame:
    """Long-format (x, y, value) table of a real array indexed [x, y]."""
    X, Y = np.meshgrid(x_nodes, y_nodes, indexing="ij")
    return pd.DataFrame({"x": X.ravel(), "y": Y.ravel(), "value": np.asarray(values).ravel()})
