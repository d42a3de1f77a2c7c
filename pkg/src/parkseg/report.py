"""Report output: atomic file writing, delimited text, and figures.

All writers go through a write-then-rename so interrupted runs never leave
truncated files behind. Figures are built on the Agg canvas directly, which
keeps rendering deterministic and free of any GUI backend.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .metrics import ConfusionMatrix
from .palette import Palette


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    """Write a file atomically via a sibling temp file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def csv_text(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def json_text(doc: object) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def fmt_metric(value: float | None, places: int = 6) -> str:
    """Fixed-precision rendering for delimited reports; None prints empty."""
    if value is None:
        return ""
    return f"{value:.{places}f}"


def save_figure_png(fig: Figure, path: str | Path, dpi: int = 100) -> None:
    FigureCanvasAgg(fig)
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=dpi)
    atomic_write_bytes(path, buf.getvalue())


def confusion_figure(matrix: ConfusionMatrix, palette: Palette) -> Figure:
    """Heatmap of the confusion counts with per-cell annotations."""
    names = [palette.by_id(c).name for c in matrix.class_ids]
    counts = matrix.counts
    fig = Figure(figsize=(1.2 * len(names) + 2.5, 1.0 * len(names) + 2.0))
    ax = fig.add_subplot(111)
    image = ax.imshow(counts, cmap="Blues")
    ax.set_xticks(range(len(names)), labels=names, rotation=45, ha="right")
    ax.set_yticks(range(len(names)), labels=names)
    ax.set_xlabel("predicted")
    ax.set_ylabel("truth")
    ax.set_title("confusion matrix (pixels)")
    threshold = counts.max() / 2 if counts.size and counts.max() > 0 else 0
    for i in range(len(names)):
        for j in range(len(names)):
            color = "white" if counts[i, j] > threshold else "black"
            ax.text(j, i, str(int(counts[i, j])), ha="center", va="center", color=color)
    fig.colorbar(image, ax=ax, shrink=0.8)
    fig.tight_layout()
    return fig


def metric_bars_figure(
    dice: dict[int, float | None],
    jaccard: dict[int, float | None],
    palette: Palette,
) -> Figure:
    """Grouped per-class bars for Dice and Jaccard; undefined classes show no bar."""
    ids = list(dice)
    names = [palette.by_id(c).name for c in ids]
    d_vals = [np.nan if dice[c] is None else dice[c] for c in ids]
    j_vals = [np.nan if jaccard.get(c) is None else jaccard[c] for c in ids]
    x = np.arange(len(ids))
    width = 0.38
    fig = Figure(figsize=(1.4 * len(ids) + 2.5, 4.0))
    ax = fig.add_subplot(111)
    ax.bar(x - width / 2, d_vals, width, label="Dice")
    ax.bar(x + width / 2, j_vals, width, label="Jaccard")
    ax.set_xticks(x, labels=names, rotation=30, ha="right")
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("score")
    ax.set_title("per-class overlap scores")
    ax.legend()
    fig.tight_layout()
    return fig


def accuracy_series_figure(
    labels: Sequence[str], values: Sequence[float | None], title: str
) -> Figure:
    """Bar series of per-item accuracies, e.g. one bar per synthetic scene."""
    x = np.arange(len(labels))
    y = [np.nan if v is None else v for v in values]
    fig = Figure(figsize=(max(4.0, 0.12 * len(labels) + 2.5), 3.5))
    ax = fig.add_subplot(111)
    ax.bar(x, y, width=0.9)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("accuracy")
    ax.set_xlabel("scene")
    ax.set_title(title)
    if len(labels) <= 20:
        ax.set_xticks(x, labels=labels, rotation=90)
    fig.tight_layout()
    return fig
