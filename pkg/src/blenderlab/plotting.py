"""Matplotlib figures rendered next to the CSV/JSON artifacts (Agg backend only)."""

from __future__ import annotations

import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

BRANCH_COLORS = {"g+": "tab:red", "g-": "tab:blue", "J+": "tab:red", "J-": "tab:blue",
                 "+": "tab:red", "-": "tab:blue"}


def _save(fig, path) -> Path:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp.png")
    fig.savefig(tmp, dpi=110, bbox_inches="tight", metadata={"Software": None})
    plt.close(fig)
    os.replace(tmp, path)
    return path


def _rect(ax, box, **kw):
    (x0, x1), (y0, y1) = box
    ax.add_patch(Rectangle((x0, y0), x1 - x0, y1 - y0, **kw))


def plot_covering(cert, path):
    """Pieces of a covering certificate against the target."""
    fig, ax = plt.subplots(figsize=(6, 4))
    if cert.kind == "1d":
        t = cert.target
        ax.hlines(0, t.lo, t.hi, colors="k", lw=6, label="target")
        for k, (b, p) in enumerate(cert.pieces):
            ax.hlines(1 + k, p.lo, p.hi, colors=BRANCH_COLORS.get(b, "tab:gray"), lw=6, label=b)
        ax.set_yticks([])
        ax.set_xlabel("y")
    else:
        rows = cert.piece_rows()
        for b, *vals in rows[:4000]:
            half = len(vals) // 2
            lo, hi = vals[:half], vals[half:]
            if len(lo) < 2:
                lo, hi = lo + [0.0], hi + [1.0]
            _rect(ax, ((lo[0], hi[0]), (lo[1], hi[1])), fc=BRANCH_COLORS.get(b, "tab:gray"), alpha=0.25, lw=0.3,
                  ec="k")
        ax.autoscale()
        ax.set_xlabel("coordinate 0")
        ax.set_ylabel("coordinate 1")
    if cert.witness is not None:
        w = list(cert.witness) + [0.0]
        ax.plot([w[0]], [w[1] if cert.kind != "1d" else 0.0], "kx", ms=10, label="gap witness")
    ax.set_title(f"{cert.kind} covering: {cert.verdict}, margin {cert.margin:.4g}")
    handles, labels = ax.get_legend_handles_labels()
    uniq = dict(zip(labels, handles))
    if uniq:
        ax.legend(uniq.values(), uniq.keys(), fontsize=8)
    return _save(fig, path)


def plot_cloud(points, path, title="IFS attractor"):
    fig, ax = plt.subplots(figsize=(6, 4))
    if points.shape[1] == 1:
        ax.plot(points[:, 0], range(len(points)), ",k")
        ax.set_xlabel("y")
        ax.set_ylabel("iteration")
    else:
        ax.plot(points[:, 0], points[:, 1], ",k")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    ax.set_title(title)
    return _save(fig, path)


def plot_boxes(boxes, path, title=""):
    """``boxes`` is a list of ``(label, [[x0, x1], [y0, y1]])``."""
    fig, ax = plt.subplots(figsize=(6, 5))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for k, (label, box) in enumerate(boxes):
        _rect(ax, box, fc=colors[k % len(colors)], alpha=0.3, ec=colors[k % len(colors)], label=label)
    ax.autoscale()
    ax.legend(fontsize=8)
    ax.set_title(title)
    return _save(fig, path)


def plot_census(records, counts, path):
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(10, 4))
    if records:
        ax0.scatter([r.a for r in records], [r.point[0] for r in records], c=[r.period for r in records],
                    cmap="viridis", s=12)
    ax0.set_xlabel("a")
    ax0.set_ylabel("sink x")
    ax1.step([c[0] for c in counts], [c[1] for c in counts], where="mid")
    ax1.set_xlabel("a")
    ax1.set_ylabel("coexisting sinks")
    return _save(fig, path)


def plot_curves(curves, path, title=""):
    """``curves`` is a list of ``(label, Nx2 array)``."""
    fig, ax = plt.subplots(figsize=(6, 5))
    for label, pts in curves:
        ax.plot(pts[:, 0], pts[:, 1], lw=1, label=label)
    ax.legend(fontsize=8)
    ax.set_title(title)
    return _save(fig, path)


def plot_scalar(xs, ys, path, xlabel, ylabel, title=""):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs, ys, "-o", ms=3)
    ax.axhline(0, color="k", lw=0.5)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    return _save(fig, path)
