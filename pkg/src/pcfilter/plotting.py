"""Static summary figures for sweep results.

One SVG per tolerance k: rows are correlation settings, columns are
replicability levels, with an error-rate panel group on the left and a power
panel group on the right.  The x axis is the signal density and every error
panel carries a horizontal reference line at the target alpha.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

__all__ = ["plot_metrics"]

_MARKERS = ("o", "s", "^", "v", "D", "x", "+", "*")


def plot_metrics(records, out_dir) -> list[Path]:
    """Render one figure per k value found in ``records``; returns the paths."""
    records = list(records)
    if not records:
        raise ValueError("no metrics records to plot")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for k in sorted({r.k for r in records}):
        sub = [r for r in records if r.k == k]
        paths.append(_plot_one_k(sub, k, out_dir))
    return paths


def _plot_one_k(records, k, out_dir: Path) -> Path:
    us = sorted({r.u for r in records})
    rhos = sorted({r.rho for r in records})
    methods = sorted({r.method for r in records})
    alpha = records[0].alpha
    ncols = 2 * len(us)
    fig, axes = plt.subplots(
        len(rhos), ncols,
        figsize=(2.6 * ncols, 2.2 * len(rhos)),
        sharex=True, squeeze=False,
    )
    for i, rho in enumerate(rhos):
        for j, u in enumerate(us):
            cell = [r for r in records if r.rho == rho and r.u == u]
            ax_err = axes[i][j]
            ax_pow = axes[i][j + len(us)]
            for mi, method in enumerate(methods):
                rows = sorted((r for r in cell if r.method == method), key=lambda r: r.pi1)
                if not rows:
                    continue
                x = [r.pi1 for r in rows]
                style = dict(marker=_MARKERS[mi % len(_MARKERS)], markersize=3,
                             linewidth=1, label=method)
                ax_err.plot(x, [r.kfwer for r in rows], **style)
                ax_pow.plot(x, [r.tpr for r in rows], **style)
            ax_err.axhline(alpha, color="grey", linestyle="--", linewidth=0.8)
            ax_err.set_ylim(bottom=0)
            ax_pow.set_ylim(-0.02, 1.02)
            if i == 0:
                label = "FWER" if k == 1 else f"{k}-FWER"
                ax_err.set_title(f"u={u}  {label}", fontsize=9)
                ax_pow.set_title(f"u={u}  TPR", fontsize=9)
            if j == 0:
                ax_err.set_ylabel(f"rho={rho:g}", fontsize=9)
            if i == len(rhos) - 1:
                ax_err.set_xlabel("pi1", fontsize=8)
                ax_pow.set_xlabel("pi1", fontsize=8)
    handles, labels = axes[0][0].get_legend_handles_labels()
    fig.legend(handles, labels, loc="lower center", ncol=min(len(labels), 7), fontsize=8)
    fig.tight_layout(rect=(0, 0.06, 1, 1))
    path = out_dir / f"summary_k{k}.svg"
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path
