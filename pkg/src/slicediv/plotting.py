"""SVG rendering of experiment figures (mean curve with a 10-90 percentile band)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def save_figure(figure, path) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    for curve in figure.curves:
        (line,) = ax.plot(curve.xs, curve.mean, marker="o", ms=3, label=curve.label)
        ax.fill_between(curve.xs, curve.p10, curve.p90, color=line.get_color(), alpha=0.2, lw=0)
    if figure.logx:
        ax.set_xscale("log")
    if figure.logy:
        ax.set_yscale("log")
    ax.set_xlabel(figure.xlabel)
    ax.set_ylabel(figure.ylabel)
    ax.set_title(figure.name)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    path = Path(path)
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return path


def save_figures(report, out_dir) -> list:
    out = Path(out_dir)
    return [save_figure(f, out / f"{f.name}.svg") for f in report.figures]
