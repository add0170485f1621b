"""Matplotlib reports rendered next to the delimited results."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import statistical_floor
from .harness import ExperimentResult, ResultRow, SequenceDetail


def save_rmse_scaling(rows: tuple[ResultRow, ...], path: str | Path) -> None:
    """Calibrated RMSE against stored capacity, one curve per noise scale."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    scales = sorted({row.noise_scale for row in rows})
    for scale in scales:
        grouped: dict[int, list[float]] = {}
        for row in rows:
            if row.noise_scale == scale:
                grouped.setdefault(row.capacity, []).append(row.rmse_calibrated)
        caps = sorted(grouped)
        ax.plot(
            caps,
            [float(np.mean(grouped[c])) for c in caps],
            "o-",
            label=f"noise x{scale:g}",
        )
    floors = {
        row.capacity: statistical_floor(row.shots / 2**row.n_address) for row in rows
    }
    caps = sorted(floors)
    ax.plot(caps, [floors[c] for c in caps], "k--", lw=1.0, label="shot-noise floor")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("stored values")
    ax.set_ylabel("calibrated RMSE")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_reconstruction(detail: SequenceDetail, path: str | Path) -> None:
    """Truth-vs-estimate scatter and the calibrated residual histogram."""
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.0))
    truth = detail.truth.ravel()
    raw = detail.decoded.ravel()
    axes[0].plot([-1.0, 1.0], [-1.0, 1.0], "k-", lw=0.8)
    axes[0].plot(truth, raw, ".", ms=3, alpha=0.5, label="raw")
    axes[0].plot(truth, detail.calibration.factor * raw, ".", ms=3, alpha=0.5, label="calibrated")
    axes[0].set_xlabel("stored value")
    axes[0].set_ylabel("estimate")
    axes[0].legend(fontsize=8)
    edges = detail.report.hist_edges
    centers = 0.5 * (edges[:-1] + edges[1:])
    axes[1].bar(centers, detail.report.hist_counts, width=edges[1] - edges[0])
    axes[1].set_xlabel("calibrated residual")
    axes[1].set_ylabel("count")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_report(result: ExperimentResult, out_dir: str | Path) -> list[Path]:
    """Render every figure for one experiment; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: list[Path] = []
    if result.rows:
        scaling = out / "rmse_scaling.png"
        save_rmse_scaling(result.rows, scaling)
        paths.append(scaling)
    for (cfg_id, scale), detail in result.details.items():
        recon = out / f"reconstruction_{cfg_id}_s{scale:g}.png"
        save_reconstruction(detail, recon)
        paths.append(recon)
    return paths
