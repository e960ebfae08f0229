"""Figure rendering for experiment reports.

Each runner's report can be turned into one or two PNG files living next
to its rows.csv.  Everything routes through the Agg backend so the CLI
works headless; figures carry no timestamps, keeping output directories
reproducible byte-for-byte apart from PNG encoder metadata.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import measures as ms

__all__ = ["spectrum_figure", "render_report"]

_FIGSIZE = (6.0, 3.7)  # roughly golden-ratio single-column


def _new_axes(xlabel, ylabel, title=None):
    fig, ax = plt.subplots(figsize=_FIGSIZE, constrained_layout=True)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    return fig, ax


def _save(fig, path):
    fig.savefig(path, dpi=150)
    plt.close(fig)


def spectrum_figure(measures, path, law=None, bins=80):
    """Histogram of pooled eigenvalues with an optional reference density."""
    pooled = np.concatenate([m.eigenvalues for _, m in measures])
    fig, ax = _new_axes("eigenvalue", "density")
    ax.hist(pooled, bins=bins, density=True, color="#4878a8", alpha=0.75, label="empirical")
    if law is None:
        law = ms.GaussianLaw()
    xs = np.linspace(pooled.min() - 0.5, pooled.max() + 0.5, 400)
    ax.plot(xs, law.pdf(xs), "k-", lw=1.2, label=law.name)
    ax.legend(frameon=False)
    _save(fig, path)
    return Path(path)


def _rows_by_metric(rows, metric):
    return [r for r in rows if r["metric"] == metric]


def _trend_figure(report, path, metric="dbl_gauss"):
    ag = [a for a in report.aggregates if a["metric"] == metric]
    if not ag:
        return None
    ns = [a["n"] for a in ag]
    means = [a["mean"] for a in ag]
    ses = [a["std"] / math.sqrt(max(a["count"], 1)) for a in ag]
    fig, ax = _new_axes("sites n", f"mean {metric}")
    ax.errorbar(ns, means, yerr=ses, fmt="o-", color="#a84848", capsize=3)
    ax.set_xticks(ns)
    _save(fig, path)
    return Path(path)


def _concentration_figure(report, path):
    xs, ys = [], []
    for r in report.rows:
        if r["metric"].startswith("exceed_") and r["value"] > 0:
            t = float(r["metric"].split("_", 1)[1])
            xs.append(r["n"] * t * t)
            ys.append(r["value"])
    if not xs:
        return None
    fig, ax = _new_axes(r"n t$^2$", "exceedance frequency")
    ax.semilogy(xs, ys, "s", color="#488a54")
    if "c" in report.fits:
        grid = np.linspace(min(xs), max(xs), 50)
        ax.semilogy(grid, report.fits["C"] * np.exp(-report.fits["c"] * grid), "k--", lw=1,
                    label=f"fit: C exp(-c n t^2), c={report.fits['c']:.3g}")
        ax.legend(frameon=False)
    _save(fig, path)
    return Path(path)


def _cf_figure(report, path):
    by_n = {}
    for r in report.rows:
        if r["metric"].startswith("cf_dev_"):
            t = float(r["metric"].rsplit("_", 1)[1])
            by_n.setdefault(r["n"], []).append((t, r["value"]))
    if not by_n:
        return None
    fig, ax = _new_axes("t", r"|$\hat\psi_n$(t) - e$^{-t^2/2}$|")
    for n, pts in sorted(by_n.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", label=f"n={n}")
    ax.set_yscale("log")
    ax.legend(frameon=False)
    _save(fig, path)
    return Path(path)


def _gclass_figure(report, path):
    grid = report.fits.get("grid", [])
    if not grid:
        return None
    fig, ax = _new_axes("pieces m", "E sup over test class")
    by_n = {}
    for row in grid:
        by_n.setdefault(row["n"], []).append((row["m"], row["mean_sup"], row["predictor"]))
    for n, pts in sorted(by_n.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", label=f"measured n={n}")
        ax.plot([p[0] for p in pts], [p[2] for p in pts], "--", alpha=0.5, label=f"predictor n={n}")
    ax.set_xscale("log", base=2)
    ax.legend(frameon=False, fontsize=8)
    _save(fig, path)
    return Path(path)


def _sphere_figure(report, path):
    return _trend_figure_metric_generic(report, path, "dbl_dos")


def _trend_figure_metric_generic(report, path, metric):
    ag = [a for a in report.aggregates if a["metric"] == metric]
    if not ag:
        return None
    ns = [a["n"] for a in ag]
    means = [a["mean"] for a in ag]
    ses = [a["std"] / math.sqrt(max(a["count"], 1)) for a in ag]
    fig, ax = _new_axes("sites n", f"mean {metric}")
    ax.errorbar(ns, means, yerr=ses, fmt="o-", color="#6858a8", capsize=3)
    ax.set_xticks(ns)
    _save(fig, path)
    return Path(path)


def render_report(report, out_dir) -> list[Path]:
    """Write the figures appropriate for this experiment next to its CSVs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    kind = report.experiment
    if kind == "sweep":
        written.append(_trend_figure(report, out / "trend_dbl_gauss.png"))
        if any(a["metric"] == "w1_gauss" for a in report.aggregates):
            written.append(_trend_figure_metric_generic(report, out / "trend_w1_gauss.png", "w1_gauss"))
    elif kind == "concentration":
        written.append(_concentration_figure(report, out / "concentration.png"))
        written.append(_trend_figure(report, out / "trend_dbl_gauss.png"))
    elif kind == "cf":
        written.append(_cf_figure(report, out / "cf_deviation.png"))
    elif kind == "gclass":
        written.append(_gclass_figure(report, out / "gclass_tradeoff.png"))
    elif kind == "sphere":
        written.append(_sphere_figure(report, out / "trend_dbl_dos.png"))
    elif kind == "lipschitz":
        fig, ax = _new_axes("observed ratio", "count")
        vals = [r["value"] for r in report.rows if r["metric"] == "lipschitz_ratio_integral"]
        if vals:
            ax.hist(vals, bins=40, color="#4878a8")
            ax.axvline(1.0, color="k", ls="--", lw=1)
            _save(fig, out / "lipschitz_ratios.png")
            written.append(out / "lipschitz_ratios.png")
        else:
            plt.close(fig)
    return [w for w in written if w is not None]
