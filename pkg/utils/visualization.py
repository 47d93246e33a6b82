import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy  # noqa: E402

from model.methods import display_name  # noqa: E402

# Stable element ids and no timestamp, so identical summaries give identical files
plt.rcParams["svg.hashsalt"] = "mixbench"
SVG_METADATA = {"Date": None}


def _save(fig, filename):
    os.makedirs(os.path.dirname(filename) or ".", exist_ok=True)
    fig.savefig(filename, format="svg", bbox_inches="tight", metadata=SVG_METADATA)
    plt.close(fig)


def plot_factor_lines(summary, factor, directory, measure="ari"):
    """Mean agreement against the levels of one factor, one line per method."""
    table = summary.means[summary.means["factor"] == factor]
    if table.empty:
        raise ValueError(f"No summary rows for factor '{factor}'")
    levels = sorted(table["level"].unique(), key=lambda v: (isinstance(v, str), v))
    positions = numpy.arange(len(levels))

    fig, ax = plt.subplots(figsize=(6, 4))
    for method, rows in table.groupby("method", sort=True):
        values = rows.set_index("level")[measure].reindex(levels)
        (line,) = ax.plot(positions, values.to_numpy(), marker="o", label=display_name(method))
        line.set_gid(f"series-{method}")

    ax.set_xticks(positions)
    ax.set_xticklabels([str(level) for level in levels])
    ax.set_xlabel(factor.replace("_", " "))
    ax.set_ylabel(f"Mean {measure.upper()}")
    ax.set_title(f"Mean {measure.upper()} by {factor.replace('_', ' ')}")
    ax.legend(fontsize="small", frameon=False)

    filename = os.path.join(directory, f"{measure}_by_{factor}.svg")
    _save(fig, filename)
    return filename


def plot_method_bars(summary, directory, measure="ari"):
    """Overall mean agreement of every method."""
    overall = summary.overall.sort_index()
    positions = numpy.arange(len(overall))

    fig, ax = plt.subplots(figsize=(6, 4))
    bars = ax.bar(positions, overall[measure].to_numpy(), color="tab:blue")
    for bar, method in zip(bars, overall.index):
        bar.set_gid(f"bar-{method}")

    ax.set_xticks(positions)
    ax.set_xticklabels([display_name(m) for m in overall.index], rotation=45, ha="right")
    ax.set_ylabel(f"Mean {measure.upper()}")
    ax.set_title(f"Mean {measure.upper()} by method")

    filename = os.path.join(directory, f"{measure}_by_method.svg")
    _save(fig, filename)
    return filename


def emit_plots(summary, directory, factors=None, measure="ari"):
    """Line chart per factor plus the method bar chart; returns the written files."""
    if summary.overall.empty:
        raise ValueError("Cannot plot an empty summary")
    factors = summary.factors if factors is None else factors
    files = [plot_factor_lines(summary, factor, directory, measure) for factor in factors]
    files.append(plot_method_bars(summary, directory, measure))
    return files
