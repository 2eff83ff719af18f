"""Report writers: JSON, CSV, plain-text tables and matplotlib figures.

Everything here is file-oriented so command-line runs leave a self-contained
report directory behind (machine-readable JSON/CSV plus rendered PNG charts).
"""

import csv
import hashlib
import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

__all__ = [
    "config_hash",
    "write_json",
    "write_csv",
    "format_table",
    "plot_ber_bars",
    "plot_psnr_frames",
    "plot_calibration_sweep",
]


def config_hash(config: dict) -> str:
    """Short stable hash of a config dict, for provenance lines in reports."""
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def write_json(payload: dict, path) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def write_csv(rows: list[dict], path, fieldnames: list[str] | None = None) -> None:
    """Write dict rows as CSV; field order taken from the first row unless given."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    if fieldnames is None:
        fieldnames = list(rows[0].keys()) if rows else []
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def format_table(rows: list[dict], columns: list[str]) -> str:
    """Fixed-width text table for terminal output."""
    if not rows:
        return "(empty)"
    cells = [[str(r.get(c, "")) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(columns)]
    lines = [
        "  ".join(c.ljust(w) for c, w in zip(columns, widths)),
        "  ".join("-" * w for w in widths),
    ]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)


def plot_ber_bars(labels: list[str], bers: list[float], path, title: str = "BER by attack") -> None:
    fig, ax = plt.subplots(figsize=(max(6, 0.9 * len(labels)), 4))
    ax.bar(range(len(labels)), [100.0 * b for b in bers], color="#3465a4")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("BER (%)")
    ax.set_title(title)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_psnr_frames(series: dict[str, list[float]], path, title: str = "Per-frame PSNR") -> None:
    """One line per clip; infinite values are clipped to the axes top."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for name, values in series.items():
        finite = [v for v in values if v != float("inf")]
        top = (max(finite) + 3.0) if finite else 100.0
        ax.plot([min(v, top) for v in values], label=name, linewidth=1.0)
    ax.set_xlabel("frame")
    ax.set_ylabel("PSNR (dB)")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_calibration_sweep(
    p_values: list[float], psnrs: list[float], bers: list[float], path
) -> None:
    """Two-axis sweep chart: fidelity falls and accuracy improves as p grows."""
    fig, ax1 = plt.subplots(figsize=(7, 4))
    ax1.plot(p_values, psnrs, "o-", color="#3465a4", label="PSNR")
    ax1.set_xlabel("embedding strength p")
    ax1.set_ylabel("PSNR (dB)", color="#3465a4")
    ax2 = ax1.twinx()
    ax2.plot(p_values, [100.0 * b for b in bers], "s--", color="#cc0000", label="BER")
    ax2.set_ylabel("zero-attack BER (%)", color="#cc0000")
    ax1.set_title("Embedding strength sweep")
    ax1.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
