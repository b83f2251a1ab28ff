"""Static charts for the capacity, utilization and tax-sweep series.

Figures are written as SVG with a fixed hash salt and no date stamp so that
reruns produce identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

SVG_METADATA = {"Date": None, "Creator": "fleetcap"}


def _style():
    plt.rcParams.update({
        "svg.hashsalt": "fleetcap",
        "svg.fonttype": "none",
        "font.size": 10,
        "axes.spines.top": False,
        "axes.spines.right": False,
    })


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)


def plot_capacity_and_catch(years, capacity, catch, path):
    _style()
    fig, ax = plt.subplots(figsize=(6.4, 3.8))
    ax.plot(years, [c / 1e4 for c in capacity], marker="o", label="Capacity output")
    ax.plot(years, [c / 1e4 for c in catch], marker="s", label="Practical catch")
    ax.set_xlabel("Year")
    ax.set_ylabel("10$^4$ t")
    ax.legend(frameon=False)
    _save(fig, path)


def plot_utilization(years, utilization, path):
    _style()
    fig, ax = plt.subplots(figsize=(6.4, 3.8))
    ax.plot(years, utilization, marker="o", color="k")
    ax.set_xlabel("Year")
    ax.set_ylabel("Capacity utilization")
    _save(fig, path)


def plot_capacity_by_rate(series, path, actual=None):
    """``series`` maps tax rate -> (years, capacities); ``actual`` is an optional (years, capacities)."""
    _style()
    fig, ax = plt.subplots(figsize=(6.4, 3.8))
    if actual is not None:
        ax.plot(actual[0], [c / 1e4 for c in actual[1]], color="k", lw=2, label="Actual")
    for rate in sorted(series):
        years, cap = series[rate]
        ax.plot(years, [c / 1e4 for c in cap], marker=".", label=f"{rate:g} yuan/t")
    ax.set_xlabel("Year")
    ax.set_ylabel("Capacity output (10$^4$ t)")
    ax.legend(frameon=False, fontsize=8)
    _save(fig, path)
