"""SVG line plots through matplotlib's Agg backend."""

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .kvformat import atomic_write  # noqa: E402

# fixed hash salt and no date stamp keep the SVG byte-identical across runs
matplotlib.rcParams["svg.hashsalt"] = "jordanchain"


def line_plot(path, x, series, xlabel="x", ylabel="", title=""):
    """``series`` maps a legend label to y-values sampled at ``x``."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, y in series.items():
        ax.plot(x, y, label=label, linewidth=1.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend()
    ax.grid(True, linewidth=0.3)
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    atomic_write(path, buf.getvalue())
