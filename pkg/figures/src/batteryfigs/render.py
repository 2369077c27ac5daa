"""Multi-panel renderers for the four figure layouts.

Styling is intentionally plain; what matters is the data geometry (peak
positions, curve orderings), which the tests check on the returned series.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .io import InputError, RunSeries, load_sweep_dir  # noqa: E402

TIME_LABEL = r"$t/\tau_{\Delta E}$"

FIGURE_IDS = ("fig2", "fig3", "fig4", "fig5")

# columns each layout needs in the input CSVs
REQUIRED = {
    "fig2": ("t", "energy", "ergotropy", "power_b", "power_w",
             "purity", "coherence_l1", "trace_distance", "ratio_w_over_e"),
    "fig3": ("t", "energy", "ergotropy", "power_b", "power_w"),
    "fig4": ("t", "purity", "coherence_l1", "trace_distance"),
    "fig5": ("t", "energy", "ergotropy"),
}


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    input_dir: Path
    output: Path
    legend_prefix: str = ""

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise InputError(f"unknown figure id {self.figure_id!r}, "
                             f"expected one of {FIGURE_IDS}")


@dataclass
class RenderResult:
    """Path of the written image plus the exact series that were drawn,
    keyed (panel, run label) -> (x, y)."""

    output: Path
    series: dict = field(default_factory=dict)


def _legend(spec: FigureSpec, run: RunSeries) -> str:
    prefix = spec.legend_prefix or ("N" if spec.figure_id == "fig2" else r"$\Gamma_\alpha$")
    sep = "" if prefix.endswith("=") else "="
    return f"{prefix}{sep}{run.label}"


def _plot_runs(ax, runs, xcol, ycol, spec, result, panel, dashed=False):
    for run in runs:
        x, y = run[xcol], run[ycol]
        ax.plot(x, y, linestyle="--" if dashed else "-", linewidth=1.1,
                label=None if dashed else _legend(spec, run))
        result.series[(panel, run.label, ycol)] = (x, y)


def render(spec: FigureSpec) -> RenderResult:
    runs = load_sweep_dir(spec.input_dir, REQUIRED[spec.figure_id])
    result = RenderResult(output=Path(spec.output))

    if spec.figure_id == "fig2":
        fig, axes = plt.subplots(2, 3, figsize=(13, 7))
        panels = {
            "energy": ("(a) stored energy / ergotropy", axes[0, 0]),
            "power": ("(b) charging powers", axes[0, 1]),
            "ratio": ("(c) ergotropy-to-energy ratio", axes[0, 2]),
            "purity": ("(d) purity", axes[1, 0]),
            "coherence": ("(e) l1 coherence", axes[1, 1]),
            "distance": ("(f) trace distance", axes[1, 2]),
        }
        _plot_runs(panels["energy"][1], runs, "t", "energy", spec, result, "energy")
        _plot_runs(panels["energy"][1], runs, "t", "ergotropy", spec, result, "energy", dashed=True)
        _plot_runs(panels["power"][1], runs, "t", "power_b", spec, result, "power")
        _plot_runs(panels["power"][1], runs, "t", "power_w", spec, result, "power", dashed=True)
        _plot_runs(panels["ratio"][1], runs, "t", "ratio_w_over_e", spec, result, "ratio")
        _plot_runs(panels["purity"][1], runs, "t", "purity", spec, result, "purity")
        _plot_runs(panels["coherence"][1], runs, "t", "coherence_l1", spec, result, "coherence")
        _plot_runs(panels["distance"][1], runs, "t", "trace_distance", spec, result, "distance")
    elif spec.figure_id == "fig3":
        fig, axes = plt.subplots(1, 2, figsize=(10, 4))
        panels = {"energy": ("(a) stored energy / ergotropy", axes[0]),
                  "power": ("(b) powers", axes[1])}
        _plot_runs(axes[0], runs, "t", "energy", spec, result, "energy")
        _plot_runs(axes[0], runs, "t", "ergotropy", spec, result, "energy", dashed=True)
        _plot_runs(axes[1], runs, "t", "power_b", spec, result, "power")
        _plot_runs(axes[1], runs, "t", "power_w", spec, result, "power", dashed=True)
    elif spec.figure_id == "fig4":
        fig, axes = plt.subplots(1, 3, figsize=(13, 4))
        panels = {"purity": ("(a) purity", axes[0]),
                  "coherence": ("(b) l1 coherence", axes[1]),
                  "distance": ("(c) trace distance", axes[2])}
        _plot_runs(axes[0], runs, "t", "purity", spec, result, "purity")
        _plot_runs(axes[1], runs, "t", "coherence_l1", spec, result, "coherence")
        _plot_runs(axes[2], runs, "t", "trace_distance", spec, result, "distance")
    else:  # fig5
        fig, axes = plt.subplots(1, 2, figsize=(10, 4))
        panels = {"energy": ("(a) released energy / ergotropy", axes[0]),
                  "ratio": ("(b) released-to-stored ratio", axes[1])}
        _plot_runs(axes[0], runs, "t", "energy", spec, result, "energy")
        _plot_runs(axes[0], runs, "t", "ergotropy", spec, result, "energy", dashed=True)
        for run in runs:
            t, e = run["t"], run["energy"]
            ratio = e / e[0] if e[0] != 0 else np.full_like(e, np.nan)
            axes[1].plot(t, ratio, linewidth=1.1, label=_legend(spec, run))
            result.series[("ratio", run.label, "released_ratio")] = (t, ratio)

    for name, (title, ax) in panels.items():
        ax.set_title(title, fontsize=10)
        ax.set_xlabel(TIME_LABEL)
        ax.grid(alpha=0.3)
    # one legend for the whole figure, top-left panel
    first_ax = next(iter(panels.values()))[1]
    first_ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()

    result.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(result.output, dpi=150)
    plt.close(fig)
    return result
