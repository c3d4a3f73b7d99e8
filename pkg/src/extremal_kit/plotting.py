"""Figures for the report path.  matplotlib is optional and imported lazily."""
from __future__ import annotations

import numpy as np


class PlottingUnavailable(RuntimeError):
    pass


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise PlottingUnavailable("matplotlib is not installed; install the 'plot' extra") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _style(ax, xlabel):
    ax.set_xlabel(xlabel)
    ax.grid(True, lw=0.3, alpha=0.5)
    for side in ("top", "right"):
        ax.spines[side].set_visible(False)


def plot_sandwich(path, x, target, minorant, majorant, title="", xlabel="x", gap_label="majorant - minorant"):
    """Target between its two approximants, with the gap underneath."""
    plt = _pyplot()
    x = np.asarray(x)
    fig, (top, bot) = plt.subplots(2, 1, figsize=(7.0, 5.5), sharex=True,
                                   gridspec_kw={"height_ratios": [3, 1]})
    top.plot(x, majorant, color="#b2182b", lw=1.0, label="majorant")
    top.plot(x, target, color="k", lw=1.2, label="target")
    top.plot(x, minorant, color="#2166ac", lw=1.0, label="minorant")
    top.legend(frameon=False, fontsize=8)
    if title:
        top.set_title(title, fontsize=10)
    top.grid(True, lw=0.3, alpha=0.5)
    bot.plot(x, np.asarray(majorant) - np.asarray(minorant), color="#4d4d4d", lw=1.0)
    bot.set_ylabel(gap_label, fontsize=8)
    _style(bot, xlabel)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_quadrature(path, nodes, weights, title=""):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 3.0))
    ax.vlines(nodes, 0.0, weights, color="#2166ac", lw=1.5)
    ax.plot(nodes, weights, "o", color="#2166ac", ms=4)
    ax.set_ylabel("weight")
    if title:
        ax.set_title(title, fontsize=10)
    _style(ax, "node")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
