"""Figure builders: total-opinion curves, centrality boxes, simplex density.

Each builder returns a :class:`FigureResult` with the saved path plus the
numbers that went into the figure, so callers (and tests) can inspect what
was drawn without parsing the image.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import (
    EmptyInputError,
    SchemaError,
    SweepTable,
    UnsupportedError,
    read_sidecar,
    read_sweep_csv,
    read_trace_dir,
)

__all__ = [
    "FigureResult",
    "plot_total_opinion",
    "plot_centrality_box",
    "plot_belief_simplex",
]

_SQRT3_2 = np.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class FigureResult:
    path: str
    info: dict = field(default_factory=dict)


def plot_total_opinion(trace_dir: str, out_path: str,
                       highlight_class: int | None = None) -> FigureResult:
    """Per-class mean total opinion vs time, with min/max replication bands.

    A single replication draws plain lines (no band). ``highlight_class``
    thickens one curve.
    """
    traces = read_trace_dir(trace_dir)
    mean = traces.totals.mean(axis=0)
    lo = traces.totals.min(axis=0)
    hi = traces.totals.max(axis=0)
    with_band = traces.n_replications > 1

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for k in range(traces.n_classes):
        width = 2.4 if k == highlight_class else 1.4
        (line,) = ax.plot(traces.steps, mean[:, k], lw=width,
                          label=f"class {k}")
        if with_band:
            ax.fill_between(traces.steps, lo[:, k], hi[:, k],
                            color=line.get_color(), alpha=0.18, lw=0)
    ax.set_xlabel("step")
    ax.set_ylabel("total opinion")
    ax.set_title(f"total opinion over time ({traces.n_replications} rep"
                 f"{'s' if traces.n_replications != 1 else ''})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, metadata=_stable_metadata(out_path))
    plt.close(fig)
    return FigureResult(out_path, {
        "n_replications": traces.n_replications,
        "n_classes": traces.n_classes,
        "band_drawn": with_band,
        "final_mean": mean[-1].tolist(),
    })


def plot_centrality_box(sweep_paths: list[str], out_path: str,
                        centrality: str = "current_flow_closeness",
                        n_bins: int = 5) -> FigureResult:
    """Final total opinion vs smart-source placement centrality.

    Placements are binned into up to ``n_bins`` quantile bins of the chosen
    centrality; each bin draws one box per algorithm plus the raw scatter.
    Legend entries carry each algorithm's Pearson correlation between
    centrality and final total opinion.
    """
    if not sweep_paths:
        raise EmptyInputError("no sweep CSVs given")
    tables = [read_sweep_csv(p) for p in sweep_paths]
    for tab in tables:
        if centrality not in tab.centralities:
            raise SchemaError(
                f"{tab.path}: no centrality column {centrality!r} "
                f"(has {sorted(tab.centralities)})"
            )

    all_cent = np.concatenate([t.centralities[centrality] for t in tables])
    edges = np.unique(np.quantile(
        all_cent, np.linspace(0.0, 1.0, min(n_bins, len(all_cent)) + 1)))
    n_groups = max(len(edges) - 1, 1)

    fig, ax = plt.subplots(figsize=(7.0, 4.4))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    width = 0.8 / len(tables)
    pcc_by_algorithm: dict[str, float] = {}
    for i, tab in enumerate(tables):
        cent = tab.centralities[centrality]
        totals = tab.mean_final_total
        pcc = _pearson(cent, totals)
        pcc_by_algorithm[tab.algorithm] = pcc
        color = colors[i % len(colors)]
        groups = [
            totals[(cent >= edges[b])
                   & (cent <= edges[b + 1] if b == n_groups - 1
                      else cent < edges[b + 1])]
            for b in range(n_groups)
        ] if len(edges) > 1 else [totals]
        positions = [b + (i + 0.5) * width - 0.4 for b in range(len(groups))]
        kept = [(pos, g) for pos, g in zip(positions, groups) if len(g)]
        if kept:
            ax.boxplot(
                [g for _, g in kept], positions=[p for p, _ in kept],
                widths=width * 0.85, patch_artist=True, manage_ticks=False,
                boxprops={"facecolor": color, "alpha": 0.35},
                medianprops={"color": color},
            )
        jitter = (np.argsort(np.argsort(cent)) / max(len(cent) - 1, 1) - 0.5)
        x = np.clip(np.searchsorted(edges[1:-1], cent, side="right"),
                    0, n_groups - 1) + (i + 0.5) * width - 0.4
        label = f"{tab.algorithm} (PCC={pcc:+.2f})" if np.isfinite(pcc) \
            else tab.algorithm
        ax.scatter(x + jitter * width * 0.5, totals, s=14, color=color,
                   zorder=3, label=label)
    centers = [f"{0.5 * (edges[b] + edges[b + 1]):.3g}"
               for b in range(n_groups)] if len(edges) > 1 \
        else [f"{all_cent[0]:.3g}"]
    ax.set_xticks(range(n_groups), centers)
    ax.set_xlabel(f"smart-source {centrality} (bin center)")
    ax.set_ylabel("mean final total opinion")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, metadata=_stable_metadata(out_path))
    plt.close(fig)
    return FigureResult(out_path, {
        "algorithms": [t.algorithm for t in tables],
        "pcc": pcc_by_algorithm,
        "n_bins": n_groups,
        "n_placements": [len(t.placements) for t in tables],
    })


def plot_belief_simplex(sidecar_path: str, out_path: str,
                        times: list[int] | None = None,
                        gridsize: int = 30) -> FigureResult:
    """Triangle (2-simplex) density of per-node opinions at selected times.

    Requires exactly three classes. ``times`` selects snapshot steps from the
    sidecar; the final beliefs are always included as the last panel.
    """
    payload = read_sidecar(sidecar_path)
    panels: list[tuple[str, np.ndarray]] = []
    snapshots = payload["snapshots"]
    for t in times or []:
        key = str(t)
        if key not in snapshots:
            raise SchemaError(
                f"{sidecar_path}: no snapshot at t={t} "
                f"(available: {sorted(snapshots, key=int)})"
            )
        panels.append((f"t={t}", _opinions(snapshots[key], sidecar_path)))
    panels.append(("final", _opinions(payload["final_alpha"], sidecar_path)))

    fig, axes = plt.subplots(1, len(panels),
                             figsize=(3.2 * len(panels), 3.4), squeeze=False)
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, _SQRT3_2]])
    centroids = []
    for ax, (label, mu) in zip(axes[0], panels):
        x = mu[:, 1] + 0.5 * mu[:, 2]
        y = _SQRT3_2 * mu[:, 2]
        ax.hexbin(x, y, gridsize=gridsize, extent=(0, 1, 0, _SQRT3_2),
                  cmap="viridis", mincnt=1)
        tri = np.vstack([corners, corners[:1]])
        ax.plot(tri[:, 0], tri[:, 1], color="black", lw=0.8)
        for k, (cx, cy) in enumerate(corners):
            ax.annotate(f"class {k}", (cx, cy), ha="center",
                        va="bottom" if cy > 0 else "top", fontsize=8)
        ax.set_title(label, fontsize=9)
        ax.set_aspect("equal")
        ax.axis("off")
        centroids.append([float(x.mean()), float(y.mean())])
    fig.tight_layout()
    fig.savefig(out_path, metadata=_stable_metadata(out_path))
    plt.close(fig)
    return FigureResult(out_path, {
        "panels": [label for label, _ in panels],
        "n_nodes": int(panels[0][1].shape[0]),
        "centroids": centroids,
    })


def _opinions(alpha_rows, source: str) -> np.ndarray:
    alpha = np.asarray(alpha_rows, dtype=float)
    if alpha.ndim != 2:
        raise SchemaError(f"{source}: belief matrix must be 2-D")
    if alpha.shape[1] != 3:
        raise UnsupportedError(
            f"{source}: simplex plot needs exactly 3 classes, "
            f"got {alpha.shape[1]}"
        )
    return alpha / alpha.sum(axis=1, keepdims=True)


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    if len(x) < 2 or np.ptp(x) == 0 or np.ptp(y) == 0:
        return float("nan")
    return float(np.corrcoef(x, y)[0, 1])


def _stable_metadata(out_path: str) -> dict | None:
    """Strip the renderer's creation timestamp so reruns match byte-for-byte."""
    if out_path.lower().endswith(".png"):
        return {"Software": "opmax-plots"}
    if out_path.lower().endswith(".svg"):
        return {"Date": None}
    return None
