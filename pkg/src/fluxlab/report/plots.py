"""Matplotlib figure rendering for the CLI report paths.

Every report command writes figures next to its delimited/JSON output.
Agg backend only; nothing here opens a window.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from ..signal.frames import GESTURE_LABELS


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_printability_figures(report: dict, walls: np.ndarray | None,
                                outdir: str | Path) -> list:
    """Wall-thickness histogram and check summary bar chart."""
    outdir = Path(outdir)
    written = []
    if walls is not None and len(walls):
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.hist(walls, bins=40, color="#4878d0")
        ax.axvline(1.0, color="crimson", ls="--", label="1.0 mm minimum")
        ax.set_xlabel("lattice wall thickness (mm)")
        ax.set_ylabel("samples")
        ax.legend(fontsize=8)
        written.append(_save(fig, outdir / "wall_thickness.png"))

    fig, ax = plt.subplots(figsize=(5, 3.2))
    labels, values, colors = [], [], []
    checks = [("min wall (mm)", report.get("min_wall_mm"),
               report.get("wall_pass")),
              ("overhang frac", report.get("overhang_fraction"), None),
              ("segment dia (mm)", report.get("segment_diameter_mm"),
               report.get("diameter_pass"))]
    if "solidity" in report:
        checks.append(("solidity", report["solidity"]["measured"],
                       report["solidity"]["pass"]))
    for name, value, ok in checks:
        if value is None:
            continue
        labels.append(name)
        values.append(value)
        colors.append("#55a868" if ok in (True, None) else "#c44e52")
    ax.barh(labels, values, color=colors)
    for i, v in enumerate(values):
        ax.text(v, i, f" {v:.3g}", va="center", fontsize=8)
    ax.set_title("printability checks")
    written.append(_save(fig, outdir / "printability.png"))
    return written


def render_training_figures(history: dict, outdir: str | Path) -> list:
    outdir = Path(outdir)
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.2))
    axes[0].plot(history["epochs"], history["train_loss"], label="train")
    axes[0].plot(history["epochs"], history["test_loss"], label="test")
    axes[0].set_xlabel("epoch")
    axes[0].set_ylabel("loss")
    axes[0].legend(fontsize=8)
    axes[1].plot(history["epochs"], history["train_acc"], label="train")
    axes[1].plot(history["epochs"], history["test_acc"], label="test")
    axes[1].set_xlabel("epoch")
    axes[1].set_ylabel("window accuracy")
    axes[1].set_ylim(0, 1.02)
    axes[1].legend(fontsize=8)
    return [_save(fig, outdir / "training_curves.png")]


def render_confusion_figure(confusion: np.ndarray, outdir: str | Path,
                            name: str = "confusion_matrix.png") -> list:
    confusion = np.asarray(confusion, dtype=float)
    norm = confusion / np.maximum(confusion.sum(axis=1, keepdims=True), 1)
    fig, ax = plt.subplots(figsize=(5.6, 5))
    im = ax.imshow(norm, cmap="Blues", vmin=0, vmax=1)
    short = ["Rest", "Comp", "Ext", "Twist", "Bend", "C+T", "E+T"]
    ax.set_xticks(range(len(short)), short, rotation=45, fontsize=8)
    ax.set_yticks(range(len(short)), short, fontsize=8)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    for i in range(len(short)):
        for j in range(len(short)):
            if confusion[i, j]:
                ax.text(j, i, int(confusion[i, j]), ha="center", va="center",
                        fontsize=7,
                        color="white" if norm[i, j] > 0.5 else "black")
    fig.colorbar(im, shrink=0.8)
    return [_save(fig, Path(outdir) / name)]


def render_scenario_figure(trace: list, outdir: str | Path) -> list:
    t = np.array([r["t_ms"] for r in trace]) / 1000.0
    temp = np.array([r["T"] for r in trace])
    modes = [r["mode"] for r in trace]
    mode_names = ["Sensing", "Switching", "Actuating", "Cooling"]
    mode_idx = np.array([mode_names.index(m) for m in modes])
    fig, axes = plt.subplots(2, 1, figsize=(7, 4.4), sharex=True)
    axes[0].plot(t, temp, color="#c44e52")
    axes[0].set_ylabel("temperature (C)")
    axes[0].axhline(45, color="gray", ls=":", lw=0.8)
    axes[1].step(t, mode_idx, where="post", color="#4878d0")
    axes[1].set_yticks(range(4), mode_names, fontsize=8)
    axes[1].set_xlabel("time (s)")
    return [_save(fig, Path(outdir) / "scenario.png")]


def render_solidity_figure(rows: list, outdir: str | Path) -> list:
    """rows: [{'target':..., 'measured':..., 'cell_size':...}]"""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    targets = [r["target"] for r in rows]
    measured = [r["measured"] for r in rows]
    ax.plot(targets, targets, ls="--", color="gray", label="ideal")
    ax.plot(targets, measured, "o-", color="#4878d0", label="measured")
    ax.set_xlabel("target solidity")
    ax.set_ylabel("measured voxel solidity")
    ax.legend(fontsize=8)
    return [_save(fig, Path(outdir) / "solidity.png")]
