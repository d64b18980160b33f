"""Figure rendering for the CLI report paths.

Every function draws to a file through the Agg backend and strips the
writer's Software tag so identical inputs produce identical PNG bytes.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402 - backend must be pinned first

from .core import EndmemberSet, match_endmembers

_SAVE_KW = {"dpi": 110, "metadata": {"Software": None}}


def plot_signatures(
    extracted: EndmemberSet,
    path,
    reference: Optional[EndmemberSet] = None,
    metric: str = "sam",
) -> None:
    """One panel per endmember: extracted signature, and when a reference
    is given, the matched reference signature with the match score."""
    p = extracted.count
    cols = min(3, p)
    rows_n = math.ceil(p / cols)
    fig, axes = plt.subplots(rows_n, cols, figsize=(4.0 * cols, 2.8 * rows_n), squeeze=False)
    pairs = None
    if reference is not None:
        pairs = match_endmembers(extracted, reference, metric=metric)
    for i in range(rows_n * cols):
        ax = axes[i // cols][i % cols]
        if i >= p:
            ax.axis("off")
            continue
        if pairs is None:
            ax.plot(extracted.spectra[:, i], lw=1.0, label="extracted")
            ax.set_title("e%d" % (i + 1), fontsize=9)
        else:
            ref_i, ext_j, score = pairs[i]
            ax.plot(reference.spectra[:, ref_i], lw=1.0, label="reference")
            ax.plot(extracted.spectra[:, ext_j], lw=1.0, ls="--", label="extracted")
            ax.set_title("e%d  %s=%.4g" % (ref_i + 1, metric, score), fontsize=9)
        ax.set_xlabel("band", fontsize=8)
        ax.tick_params(labelsize=7)
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_convergence(
    best_history: Sequence[float],
    path,
    mean_history: Optional[Sequence[float]] = None,
    title: str = "convergence",
) -> None:
    """Best (and optionally mean) fitness per generation."""
    fig, ax = plt.subplots(figsize=(6.0, 3.5))
    gens = range(len(best_history))
    ax.plot(gens, best_history, lw=1.2, label="best fitness")
    if mean_history is not None:
        ax.plot(range(len(mean_history)), mean_history, lw=1.0, ls="--", label="mean fitness")
    ax.set_xlabel("generation")
    ax.set_ylabel("simplex volume")
    ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_rms_box(per_run, labels: Sequence[str], metric: str, path) -> None:
    """Box plot of per-run RMS scores per algorithm; failed runs skipped."""
    series = []
    kept = []
    for label in labels:
        values = [v for v in per_run[label][metric] if v is not None]
        if values:
            series.append(values)
            kept.append(label)
    fig, ax = plt.subplots(figsize=(1.4 * max(4, len(kept)), 3.5))
    if series:
        ax.boxplot(series, tick_labels=kept)
    ax.set_ylabel("RMS %s" % metric.upper())
    ax.tick_params(axis="x", labelsize=8, rotation=20)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
