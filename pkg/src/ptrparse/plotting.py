"""Figures for the report paths of the CLI (written to files, never shown)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_action_counts(stats, path, title=None):
    """Scatter of oracle length against sentence length, with the n-1 and
    2n-1 reference lines."""
    lengths = [n for n, _ in stats.rows]
    counts = [c for _, c in stats.rows]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.scatter(lengths, counts, s=8, alpha=0.5, label="sentences")
    top = max(lengths) if lengths else 1
    xs = [1, top]
    ax.plot(xs, [x - 1 for x in xs], color="tab:red", lw=1, label="y = x - 1")
    ax.plot(xs, [2 * x - 1 for x in xs], color="tab:green", lw=1, label="y = 2x - 1")
    ax.set_xlabel("sentence length")
    ax.set_ylabel("number of actions")
    ax.set_title(title or f"{stats.actions_per_token:.2f} actions per token")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_training_curve(history, path):
    epochs = [h["epoch"] for h in history]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(epochs, [h["loss"] for h in history], label="train loss")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss per sentence")
    accs = [(h["epoch"], h["heldout_action_acc"]) for h in history if h.get("heldout_action_acc") is not None]
    if accs:
        ax2 = ax.twinx()
        ax2.plot(*zip(*accs), color="tab:orange", label="held-out action acc")
        ax2.set_ylabel("action accuracy")
        ax2.set_ylim(0, 1.02)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
