"""Static figures for the CLI report path (Agg backend, PNG files)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .aggregation import FORResult, LossMap  # noqa: E402

LABEL_COLORS = {
    "undervoltage": "#1f77b4",
    "overvoltage": "#d62728",
    "line_current": "#ff7f0e",
    "transformer_loading": "#9467bd",
    "fpu_limit": "#7f7f7f",
}

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "figure.figsize": (5.0, 4.0),
    "figure.dpi": 100,
    "savefig.bbox": "tight",
}


def _pq_axes(ax):
    ax.set_xlabel("P_vert [MW]")
    ax.set_ylabel("Q_vert [Mvar]")
    ax.grid(True, lw=0.3, alpha=0.5)


def plot_for(result: FORResult, path, cloud=None) -> None:
    """FOR boundary with each point colored by its binding constraint."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ring = result.ring
        if len(ring):
            closed = np.vstack([ring, ring[:1]])
            ax.plot(closed[:, 0], closed[:, 1], color="k", lw=0.8, zorder=1)
        if cloud is not None and len(cloud):
            ax.scatter(cloud[:, 0], cloud[:, 1], s=2, color="#bbbbbb", zorder=0, label="sampled")
        labels = np.array([bp.binding for bp in result.boundary])
        for name, color in LABEL_COLORS.items():
            sel = labels == name
            if sel.any():
                ax.scatter(ring[sel, 0], ring[sel, 1], s=12, color=color, label=name, zorder=2)
        ax.plot(*result.operating_point_pq, marker="x", color="k", ls="", label="operating point")
        _pq_axes(ax)
        ax.set_title(f"FOR scenario {result.scenario_id}, area {result.area:.2f} MW·Mvar")
        ax.legend(loc="best")
        fig.savefig(path)
        plt.close(fig)


def plot_samples(cloud, hull, path) -> None:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if len(cloud):
            ax.scatter(cloud[:, 0], cloud[:, 1], s=2, color="#4c72b0", label="feasible samples")
        if len(hull) >= 2:
            closed = np.vstack([hull, hull[:1]])
            ax.plot(closed[:, 0], closed[:, 1], color="k", lw=0.8, label="convex hull")
        _pq_axes(ax)
        ax.legend(loc="best")
        fig.savefig(path)
        plt.close(fig)


def plot_loss_map(lm: LossMap, path, result: FORResult | None = None) -> None:
    """Heat map of total losses over the rasterized FOR."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        P = lm.grid(lm.p)
        Q = lm.grid(lm.q)
        L = np.ma.masked_invalid(lm.grid())
        mesh = ax.pcolormesh(P, Q, L, shading="nearest", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label="losses [MW]")
        if result is not None and len(result.ring):
            closed = np.vstack([result.ring, result.ring[:1]])
            ax.plot(closed[:, 0], closed[:, 1], color="w", lw=0.8)
        _pq_axes(ax)
        fig.savefig(path)
        plt.close(fig)


def plot_epf(p_norm, costs: dict, path, zones=None) -> None:
    """EPF curves over normalized flexibility; ``costs`` maps curve kind to values."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if zones is not None:
            for k, z in enumerate(zones.zones):
                ax.axvspan(*z.breakpoints, color="#000000", alpha=0.04 * (k % 2 + 1), lw=0)
                ax.text(sum(z.breakpoints) / 2, 0.98, z.zone, transform=ax.get_xaxis_transform(),
                        ha="center", va="top", fontsize=7)
        for kind, c in costs.items():
            ax.plot(p_norm, c, label=kind)
        ax.set_xlabel("normalized flexibility P")
        ax.set_ylabel("cost")
        ax.grid(True, lw=0.3, alpha=0.5)
        ax.legend(loc="best")
        fig.savefig(path)
        plt.close(fig)
