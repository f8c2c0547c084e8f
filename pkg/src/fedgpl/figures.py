"""Figure rendering for run and sweep reports.

matplotlib is imported inside the render functions so that code paths that
never plot (accounting, partitioning) stay import-light.
"""

import csv
import os
from collections import defaultdict

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def _read_rounds(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def render_run(out_dir):
    """Round curves and the final transferability heatmap, next to the CSVs.

    Returns the list of files written.
    """
    plt = _pyplot()
    written = []
    rows = _read_rounds(os.path.join(out_dir, "rounds.csv"))
    by_round = defaultdict(lambda: {"loss": [], "acc": []})
    for row in rows:
        bucket = by_round[int(row["round"])]
        bucket["loss"].append(float(row["loss"]))
        bucket["acc"].append(float(row["acc"]))
    rounds = sorted(by_round)
    losses = [float(np.mean(by_round[r]["loss"])) for r in rounds]
    accs = [float(np.mean(by_round[r]["acc"])) for r in rounds]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(rounds, losses, marker="o", markersize=3)
    ax1.set_xlabel("round")
    ax1.set_ylabel("mean loss")
    ax2.plot(rounds, accs, marker="o", markersize=3, color="tab:green")
    ax2.set_xlabel("round")
    ax2.set_ylabel("mean test accuracy")
    ax2.set_ylim(0.0, 1.05)
    fig.tight_layout()
    path = os.path.join(out_dir, "rounds.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    tau_path = os.path.join(out_dir, "tau.csv")
    if os.path.exists(tau_path):
        with open(tau_path, newline="", encoding="utf-8") as fh:
            tau_rows = list(csv.DictReader(fh))
        if tau_rows:
            last = max(int(r["round"]) for r in tau_rows)
            cells = [r for r in tau_rows if int(r["round"]) == last]
            n = max(int(r["i"]) for r in cells) + 1
            tau = np.zeros((n, n))
            for r in cells:
                tau[int(r["i"]), int(r["j"])] = float(r["tau"])
            fig, ax = plt.subplots(figsize=(4.5, 4))
            im = ax.imshow(tau, cmap="viridis")
            ax.set_xlabel("source client")
            ax.set_ylabel("target client")
            ax.set_title(f"transferability, round {last}")
            fig.colorbar(im, ax=ax)
            fig.tight_layout()
            path = os.path.join(out_dir, "tau.png")
            fig.savefig(path, dpi=120)
            plt.close(fig)
            written.append(path)
    return written


def render_sweep(sweep_rows, out_dir):
    """Accuracy/F1 against the swept value; returns the files written."""
    plt = _pyplot()
    values = [row["value"] for row in sweep_rows]
    accs = [row["mean_acc"] for row in sweep_rows]
    f1s = [row["mean_f1"] for row in sweep_rows]
    numeric = all(_is_number(v) for v in values)
    xs = [float(v) for v in values] if numeric else range(len(values))

    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(xs, accs, marker="o", label="accuracy")
    ax.plot(xs, f1s, marker="s", label="macro F1")
    if numeric and min(xs) > 0 and max(xs) / max(min(xs), 1e-12) > 50:
        ax.set_xscale("log")
    if not numeric:
        ax.set_xticks(list(xs))
        ax.set_xticklabels([str(v) for v in values])
    ax.set_xlabel(sweep_rows[0]["key"] if sweep_rows else "value")
    ax.set_ylabel("final mean metric")
    ax.set_ylim(0.0, 1.05)
    ax.legend()
    fig.tight_layout()
    path = os.path.join(out_dir, "sweep.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return [path]


def _is_number(text):
    try:
        float(text)
        return True
    except (TypeError, ValueError):
        return False
