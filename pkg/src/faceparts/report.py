"""EvalReport output: JSON, text table, per-test CSV and rendered figures."""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import EXPRESSIONS, EvalReport


def render_text(report: EvalReport) -> str:
    """Human-readable accuracy summary and confusion table."""
    lines = []
    lines.append(f"tests run          : {len(report.per_test_accuracy)}")
    lines.append(f"folds per test     : {report.config.n_folds}")
    lines.append(f"samples per test   : "
                 f"{sorted(set(report.samples_per_test)) or '-'}")
    lines.append(f"mean accuracy      : {report.mean_accuracy:.4f}")
    if report.per_test_accuracy:
        lines.append(f"min / max accuracy : {min(report.per_test_accuracy):.4f}"
                     f" / {max(report.per_test_accuracy):.4f}")
    lines.append("")
    lines.append("confusion matrix (rows = truth, row-normalized):")
    header = "          " + " ".join(f"{e[:7]:>8}" for e in EXPRESSIONS)
    lines.append(header)
    for i, name in enumerate(EXPRESSIONS):
        row = " ".join(f"{v:8.4f}" for v in report.confusion[i])
        lines.append(f"{name:<10}{row}")
    return "\n".join(lines) + "\n"


def write_accuracy_csv(path, report: EvalReport) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["test", "accuracy", "n_samples"])
        for t, (acc, n) in enumerate(zip(report.per_test_accuracy,
                                         report.samples_per_test)):
            writer.writerow([t, repr(acc), n])


def plot_confusion(path, report: EvalReport) -> None:
    fig, ax = plt.subplots(figsize=(6.5, 5.5))
    im = ax.imshow(report.confusion, cmap="Blues", vmin=0.0, vmax=1.0)
    fig.colorbar(im, ax=ax, fraction=0.046)
    ax.set_xticks(range(len(EXPRESSIONS)))
    ax.set_xticklabels(EXPRESSIONS, rotation=45, ha="right")
    ax.set_yticks(range(len(EXPRESSIONS)))
    ax.set_yticklabels(EXPRESSIONS)
    ax.set_xlabel("Predicted")
    ax.set_ylabel("True")
    ax.set_title(f"Mean accuracy {report.mean_accuracy:.2%} over "
                 f"{len(report.per_test_accuracy)} tests")
    for i in range(len(EXPRESSIONS)):
        for j in range(len(EXPRESSIONS)):
            v = report.confusion[i, j]
            ax.text(j, i, f"{v:.2f}", ha="center", va="center",
                    color="white" if v > 0.5 else "black", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plot_accuracy(path, report: EvalReport) -> None:
    acc = np.asarray(report.per_test_accuracy)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(np.arange(len(acc)), acc, marker="o", markersize=3, linewidth=1)
    ax.axhline(report.mean_accuracy, color="tab:red", linestyle="--",
               label=f"mean {report.mean_accuracy:.3f}")
    ax.set_xlabel("Test")
    ax.set_ylabel("Accuracy")
    ax.set_ylim(0.0, 1.02)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def write_report(out_dir, report: EvalReport) -> dict[str, str]:
    """Write all report artifacts; returns name -> path."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "json": os.path.join(out_dir, "report.json"),
        "text": os.path.join(out_dir, "report.txt"),
        "csv": os.path.join(out_dir, "per_test_accuracy.csv"),
        "confusion_png": os.path.join(out_dir, "confusion_matrix.png"),
        "accuracy_png": os.path.join(out_dir, "accuracy_per_test.png"),
    }
    with open(paths["json"], "w", encoding="utf-8") as f:
        f.write(report.to_json() + "\n")
    with open(paths["text"], "w", encoding="utf-8") as f:
        f.write(render_text(report))
    write_accuracy_csv(paths["csv"], report)
    plot_confusion(paths["confusion_png"], report)
    plot_accuracy(paths["accuracy_png"], report)
    return paths
