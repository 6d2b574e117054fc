"""Figure rendering for experiment reports.

Every plot goes straight to a file next to the delimited output; nothing is
shown interactively.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .harness import AggregateStats  # noqa: E402

FIG_SIZE = (7.0, 4.2)
DPI = 150


def plot_learning_curve(
    stats: AggregateStats,
    path,
    title: str = "joint coverage per round",
    ylabel: str = "targets covered",
) -> None:
    """Mean curve with its confidence band plus the trailing average."""
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    ax.fill_between(
        stats.rounds,
        stats.ci_low,
        stats.ci_high,
        alpha=0.25,
        color="tab:blue",
        label="95% CI",
        linewidth=0,
    )
    ax.plot(stats.rounds, stats.mean, color="tab:blue", linewidth=0.8, label="mean")
    ax.plot(
        stats.rounds,
        stats.running_avg,
        color="tab:red",
        linewidth=1.6,
        label=f"running avg (window {stats.window})",
    )
    ax.set_xlabel("round")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(loc="lower right")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def plot_comparison(
    curves: Mapping[str, AggregateStats],
    path,
    title: str = "running-average coverage",
    ylabel: str = "targets covered",
) -> None:
    """Running averages of several settings on shared axes."""
    if not curves:
        raise ValueError("nothing to plot")
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    for label, stats in curves.items():
        line = ax.plot(
            stats.rounds, stats.running_avg, linewidth=1.5, label=label
        )[0]
        ax.fill_between(
            stats.rounds,
            stats.ci_low,
            stats.ci_high,
            alpha=0.12,
            color=line.get_color(),
            linewidth=0,
        )
    ax.set_xlabel("round")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(loc="lower right")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def plot_error_trace(
    rounds: Sequence[int],
    peak_errors: Sequence[float],
    path,
    title: str = "peak cumulative estimate error",
) -> None:
    """One agent's M_t trace from an instrumented run."""
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    ax.plot(rounds, peak_errors, linewidth=0.9, color="tab:purple")
    ax.set_xlabel("round")
    ax.set_ylabel("M_t")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
