"""CSV and figure output for the experiment subcommands."""
from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from kap.wire import atomic_write  # noqa: E402

plt.rcParams.update({
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 120,
    "font.size": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
})


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    atomic_write(path, buf.getvalue())


def default_figure_path(csv_path):
    return Path(csv_path).with_suffix(".png")


def _save(fig, path):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.stem}.", suffix=path.suffix)
    os.close(fd)
    try:
        fig.savefig(tmp, bbox_inches="tight")
        os.replace(tmp, path)
    finally:
        plt.close(fig)
        if os.path.exists(tmp):
            os.unlink(tmp)


def plot_counts(stats, path):
    """Histogram of knapsack-solution counts against the 2^n/p estimate."""
    fig, ax = plt.subplots()
    ax.hist(stats.counts, bins=min(30, max(5, len(stats.counts) // 2)), color="0.6", edgecolor="0.2")
    ax.axvline(stats.prediction, color="C3", lw=1.5, label=f"2^n/p = {stats.prediction:.1f}")
    ax.axvline(stats.mean, color="C0", lw=1.5, ls="--", label=f"mean = {stats.mean:.1f}")
    ax.axvspan(stats.prediction / 4, stats.prediction * 4, color="C3", alpha=0.08, label="factor-4 band")
    ax.set_xlabel("solutions of the knapsack row")
    ax.set_ylabel("instances")
    ax.set_title(f"n = {stats.n}, p = {stats.p}, {len(stats.counts)} instances")
    ax.legend(frameon=False)
    _save(fig, path)


def plot_bench(rows, path):
    """Handshake wall time and hash count against n, log-log."""
    ns = [r["n"] for r in rows]
    fig, ax = plt.subplots()
    ax.loglog(ns, [r["seconds"] for r in rows], "o-", color="C0", label="handshake time")
    ax.set_xlabel("n")
    ax.set_ylabel("seconds per handshake")
    ax2 = ax.twinx()
    ax2.loglog(ns, [r["alice_h"] for r in rows], "s--", color="C1", label="Alice h evaluations")
    ax2.set_ylabel("h evaluations")
    lines = ax.get_lines() + ax2.get_lines()
    ax.legend(lines, [ln.get_label() for ln in lines], frameon=False, loc="upper left")
    _save(fig, path)
