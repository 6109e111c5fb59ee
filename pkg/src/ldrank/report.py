"""Figures written next to the CSV reports."""

from __future__ import annotations

from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .evaluate import Timing  # noqa: E402

# fixed metadata keeps repeated runs byte-identical
_PNG_META = {"Software": None}


def _style(ax):
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    ax.grid(axis="y", linewidth=0.5, alpha=0.5)


def plot_timings(rows: Sequence[Timing], path) -> None:
    """Bar chart of the median run time per strategy."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    names = [r.strategy.upper() for r in rows]
    ax.bar(names, [r.median_ms for r in rows], color="0.35", width=0.6)
    ax.set_ylabel("median time (ms)")
    if rows:
        ax.set_title(f"{rows[0].n_entities} entities, {rows[0].nnz} edges", fontsize=9)
    _style(ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)


def plot_ndcg(curves: Mapping[str, Sequence[tuple[int, float]]], path) -> None:
    """NDCG against the rank cutoff, one line per strategy."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    markers = "osd^v<>"
    for i, (name, points) in enumerate(curves.items()):
        xs, ys = zip(*points) if points else ((), ())
        ax.plot(xs, ys, marker=markers[i % len(markers)], markersize=4, linewidth=1.2, label=name.upper())
    ax.set_xlabel("rank cutoff r")
    ax.set_ylabel("NDCG@r")
    ax.set_ylim(0, 1.02)
    ax.legend(frameon=False, fontsize=8)
    _style(ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)
