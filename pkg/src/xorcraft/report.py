"""Batch classification reports: a delimited table plus matplotlib figures."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

COLUMNS = ("file", "xors", "treeLike", "treePartFraction", "cyclePartitionable",
           "connectedComponentCount", "cycleCountBound", "verdictUP", "verdictSubst")


def rows_to_delimited(rows: Sequence[dict], delimiter: str = ",") -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, delimiter=delimiter,
                            extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def plot_tree_part_fractions(rows: Sequence[dict], path: Path) -> Path:
    """Sorted tree-like part fractions, one point per instance."""
    fractions = sorted(r["treePartFraction"] for r in rows)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(range(1, len(fractions) + 1), [100 * f for f in fractions], marker=".", lw=1)
    ax.set_xlabel("instance (sorted)")
    ax.set_ylabel("tree-like part (% of xor-clauses)")
    ax.set_ylim(-2, 102)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_class_counts(rows: Sequence[dict], path: Path) -> Path:
    labels = ["tree-like", "probably UP", "cycle-partitionable", "probably Subst"]
    counts = [
        sum(1 for r in rows if r["treeLike"]),
        sum(1 for r in rows if r.get("verdictUP") == "probably-deducible"),
        sum(1 for r in rows if r["cyclePartitionable"]),
        sum(1 for r in rows if r.get("verdictSubst") == "probably-deducible"),
    ]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(labels, counts, color=["#4c72b0", "#8fa8d0", "#55a868", "#9ccf9f"])
    ax.set_ylabel(f"instances (of {len(rows)})")
    ax.tick_params(axis="x", labelsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_translation_sizes(ns: Sequence[int], sizes: dict[str, Sequence[int]], path: Path) -> Path:
    """Added-clause counts per translation on a log scale."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for name, ys in sizes.items():
        ax.plot(ns, ys, marker="o", ms=3, label=name)
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("added xor-clauses")
    ax.legend(frameon=False)
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def write_report(rows: Sequence[dict], out_dir: Path, delimiter: str = ",") -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    table = out_dir / ("classification.tsv" if delimiter == "\t" else "classification.csv")
    table.write_text(rows_to_delimited(rows, delimiter), encoding="utf-8")
    return [
        table,
        plot_tree_part_fractions(rows, out_dir / "tree_part_fractions.png"),
        plot_class_counts(rows, out_dir / "class_counts.png"),
    ]
