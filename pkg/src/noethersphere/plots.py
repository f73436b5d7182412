"""Figure rendering for the CLI report path (matplotlib, file output only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .numeric import DriftReport, GeodesicTrajectory


def render_trajectory_figure(
    tr: GeodesicTrajectory,
    drifts: list[tuple[str, np.ndarray]] | None,
    path: str | Path,
) -> Path:
    """Two-panel figure: coordinate histories and first-integral drift."""
    path = Path(path)
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 7), sharex=True)
    s = tr.s
    labels = ("t", "r", "theta", "phi")
    for i, label in enumerate(labels):
        ax1.plot(s, tr.states[:, i], label=label, lw=1.2)
    ax1.set_ylabel("coordinate value")
    ax1.legend(loc="best", ncol=4, fontsize=9)
    name = tr.metric.name or "metric"
    ax1.set_title(f"geodesic on {name} (tol {tr.tol:g}, seed {tr.seed})")
    if drifts:
        for label, values in drifts:
            delta = np.abs(values - values[0])
            ax2.semilogy(s, np.maximum(delta, 1e-18), label=label, lw=1.0)
        ax2.legend(loc="best", ncol=3, fontsize=8)
    ax2.set_xlabel("affine parameter s")
    ax2.set_ylabel("|I(s) - I(0)|")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_drift_summary(reports: list[DriftReport], path: str | Path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 4))
    names = [r.name for r in reports]
    values = [max(r.relative_drift, 1e-18) for r in reports]
    ax.barh(names, values)
    ax.set_xscale("log")
    ax.set_xlabel("relative drift")
    ax.set_title("first-integral conservation drift")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
