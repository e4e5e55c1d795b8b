"""Static SVG figures: accuracy bars, response overlays and top-k curves."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed ids and no timestamp keep reruns byte-identical
matplotlib.rcParams["svg.hashsalt"] = "loopgrade"
_META = {"Date": None, "Creator": "loopgrade"}

OK_COLOR, NOK_COLOR = "tab:green", "tab:red"


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)


def accuracy_bars(results: dict, path, title="Validation accuracy") -> None:
    """``results[kind] = {"all30": acc, "popular12": acc}``; missing entries are skipped."""
    kinds = list(results)
    fig, ax = plt.subplots(figsize=(8, 4))
    width = 0.4
    for j, (fs, color) in enumerate((("all30", "tab:blue"), ("popular12", "tab:gray"))):
        xs = [i + (j - 0.5) * width for i, k in enumerate(kinds) if fs in results[k]]
        ys = [100 * results[k][fs] for k in kinds if fs in results[k]]
        if xs:
            ax.bar(xs, ys, width, label=fs, color=color)
    ax.set_xticks(range(len(kinds)), kinds, rotation=20)
    ax.set_ylabel("accuracy [%]")
    ax.set_ylim(40, 100)
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def response_overlay(reference, cases, path, title="") -> None:
    """Reference response (black) under assessed responses coloured by verdict.

    ``cases`` holds ``(response, label)`` pairs.
    """
    fig, ax = plt.subplots(figsize=(7, 4))
    for resp, label in cases:
        ax.plot(resp.t, resp.r, color=OK_COLOR if label == "OK" else NOK_COLOR, lw=0.8, alpha=0.7)
    ax.plot(reference.t, reference.r, color="black", lw=1.6, ls="--", label="reference")
    peak = max(abs(reference.r).max(), 1e-9)
    ax.set_ylim(-1.5 * peak, 2.0 * peak)
    ax.set_xlim(0, reference.horizon)
    ax.set_xlabel("t")
    ax.set_ylabel("r(t)")
    ax.set_title(title)
    ax.legend(loc="upper right")
    fig.tight_layout()
    _save(fig, path)


def topk_curves(curves: dict, path) -> None:
    """``curves[kind] = {k: accuracy}``."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for kind, acc in curves.items():
        ks = sorted(acc)
        ax.plot(ks, [100 * acc[k] for k in ks], marker="o", ms=3, label=kind)
    ax.set_xlabel("top-k features")
    ax.set_ylabel("accuracy [%]")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)
