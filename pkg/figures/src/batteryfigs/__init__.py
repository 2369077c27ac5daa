"""Figure renderer for spinbattery CSV outputs."""

__version__ = "0.1.0"

from .io import CSV_COLUMNS, InputError, RunSeries, load_sweep_dir, read_metrics_csv
from .render import FIGURE_IDS, FigureSpec, RenderResult, render

__all__ = [
    "CSV_COLUMNS",
    "FIGURE_IDS",
    "FigureSpec",
    "InputError",
    "RenderResult",
    "RunSeries",
    "load_sweep_dir",
    "read_metrics_csv",
    "render",
]
