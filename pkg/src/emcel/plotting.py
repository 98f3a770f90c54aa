"""Figure rendering for report tables.

Each table written by the command line interface can be re-rendered to a
PNG from the file alone: the experiment name in the header selects the
layout and the embedded configuration supplies labels.  Matplotlib runs
on the Agg backend, so no display is needed.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import cantor
from .reports import read_table

__all__ = ["render_table"]

_BAND_STYLE = {"color": "tab:orange", "alpha": 0.25, "linewidth": 0}


def _cantor_level_for_bands(config: dict) -> int:
    level = config.get("level")
    if level is None:
        level = 6
    return min(int(level), 6)


def _model_name(config: dict) -> str:
    return str(config.get("model", ""))


def _plot_paths(ax, config: dict, cols: dict) -> None:
    ids = cols["path"].astype(int)
    folded = "state_folded" in cols
    for pid in np.unique(ids):
        sel = ids == pid
        t = cols["t"][sel]
        if folded:
            ax.plot(t, cols["state_folded"][sel], linewidth=1.2)
            ax.plot(t, cols["state"][sel], linewidth=0.8, linestyle="--", alpha=0.4)
        else:
            ax.plot(t, cols["state"][sel], linewidth=1.2)
    if _model_name(config) == "cantor":
        for lo, hi in cantor.intervals(_cantor_level_for_bands(config)):
            ax.axhspan(lo, hi, **_BAND_STYLE)
    ax.set_xlabel("t")
    ax.set_ylabel("state")
    extra = " (dashed: before folding)" if folded else ""
    ax.set_title(f"{_model_name(config)} chain paths, h={config.get('h')}{extra}")


def _plot_scalefactor(ax, config: dict, cols: dict) -> None:
    ax.plot(cols["y"], cols["step_over_sqrt_h"], linewidth=1.2)
    if _model_name(config) == "cantor":
        for lo, hi in cantor.intervals(_cantor_level_for_bands(config)):
            ax.axvspan(lo, hi, **_BAND_STYLE)
    ax.set_xlabel("y")
    ax.set_ylabel("step / sqrt(h)")
    ax.set_title(f"{_model_name(config)} step size, h={config.get('h')}")


def _plot_cdf(ax, config: dict, cols: dict) -> None:
    ax.step(cols["x"], cols["cdf_empirical"], where="post", linewidth=1.2, label="chain")
    if "cdf_reference" in cols:
        ax.plot(cols["x"], cols["cdf_reference"], linestyle="--", linewidth=1.2, label="reference")
    ax.set_xlabel("x")
    ax.set_ylabel("F(x)")
    ax.legend()
    ax.set_title(f"{_model_name(config)} terminal distribution, t={config.get('t')}, h={config.get('h')}")


def _plot_rate(ax, config: dict, cols: dict) -> None:
    x = cols["log2_inv_h"]
    for name in cols:
        if not name.endswith("_abs_error"):
            continue
        label = name.replace("_abs_error", "")
        errs = np.maximum(cols[name], np.finfo(float).eps)
        y = np.log2(errs)
        slope, intercept = np.polyfit(x, y, 1)
        (line,) = ax.plot(x, y, "o", label=f"{label} (slope {slope:.2f})")
        ax.plot(x, intercept + slope * x, "-", linewidth=1.0, color=line.get_color(), alpha=0.6)
    ax.set_xlabel("log2(1/h)")
    ax.set_ylabel("log2(absolute error)")
    ax.legend()
    ax.set_title(f"{_model_name(config)} convergence, t={config.get('t')}")


def _plot_conda(ax, config: dict, cols: dict) -> None:
    ax.loglog(cols["h"], np.maximum(cols["sup_rel_error"], np.finfo(float).tiny), "o-")
    ax.set_xlabel("h")
    ax.set_ylabel("sup |functional - h| / h")
    ax.set_title(f"{_model_name(config)} step-budget deviation on the window")


def _plot_generic(ax, config: dict, cols: dict) -> None:
    names = list(cols)
    x = cols[names[0]]
    for name in names[1:]:
        ax.plot(x, cols[name], label=name)
    ax.set_xlabel(names[0])
    if len(names) > 2:
        ax.legend()


_PLOTTERS = {
    "paths": _plot_paths,
    "scalefactor": _plot_scalefactor,
    "cdf": _plot_cdf,
    "rate": _plot_rate,
    "conda": _plot_conda,
}


def render_table(csv_path, png_path=None) -> str:
    """Render the figure for a report table; returns the PNG path."""
    meta, cols = read_table(csv_path)
    if png_path is None:
        root, _ = os.path.splitext(os.fspath(csv_path))
        png_path = root + ".png"
    config = meta.get("config", {}) or {}
    experiment = meta.get("experiment", "")
    plotter = _PLOTTERS.get(experiment, _plot_generic)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    try:
        plotter(ax, config, cols)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(png_path, dpi=150)
    finally:
        plt.close(fig)
    return os.fspath(png_path)
