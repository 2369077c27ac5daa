"""Secondary acceptance: render the four figure analogues from the sweep
directories the primary acceptance suite wrote, and check the drawn ratio
panel against the primary's own summary.

Run the primary suite first (pytest in the repository root); these tests
skip cleanly when the artifact tree is absent.
"""

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from batteryfigs import FigureSpec, render

ARTIFACTS = Path(__file__).resolve().parents[2] / "artifacts" / "acceptance"

INPUTS = {
    "fig2": "chain_sweep",
    "fig3": "noise_sweep_y",
    "fig4": "noise_sweep_z",
    "fig5": "discharge_sweep_z",
}

# reference band inherited from primary criterion 1 (N=6 entry)
REFERENCE_N6 = {"ratio": 0.99, "ratio_tol": 0.02, "t": 3.80, "t_tol": 0.4}


def _input_dir(figure_id):
    path = ARTIFACTS / INPUTS[figure_id]
    if not (path / "summary.csv").exists():
        pytest.skip(f"{path} absent; run the primary acceptance suite first")
    return path


@pytest.mark.parametrize("figure_id", ["fig2", "fig3", "fig4", "fig5"])
def test_renders_without_error(figure_id, tmp_path):
    out = tmp_path / f"{figure_id}.png"
    prefix = "N=" if figure_id == "fig2" else ""
    result = render(FigureSpec(figure_id, _input_dir(figure_id), out,
                               legend_prefix=prefix))
    assert out.exists() and out.stat().st_size > 10_000
    assert result.series


def test_rendered_ratio_peak_matches_summary(tmp_path):
    root = _input_dir("fig2")
    result = render(FigureSpec("fig2", root, tmp_path / "fig2.png"))
    t, ratio = result.series[("ratio", "6", "ratio_w_over_e")]
    finite = ~np.isnan(ratio)
    k = int(np.nanargmax(ratio))
    with (root / "summary.csv").open() as fh:
        summary = {float(r["value"]): r for r in csv.DictReader(fh)}
    assert abs(ratio[k] - float(summary[6]["ratio_max"])) < 1e-9
    assert abs(t[k] - float(summary[6]["t_ratio_max"])) < 1e-9
    assert finite.any()


def test_rendered_ratio_peak_in_criterion1_band(tmp_path):
    calib_path = ARTIFACTS / "omega_calibration.json"
    if not calib_path.exists():
        pytest.skip("calibration record absent; run the primary acceptance suite first")
    calibration = json.loads(calib_path.read_text())
    if not calibration["strict_hit"]:
        pytest.xfail("primary criterion 1 did not calibrate into the reference band; "
                     "the rendered-peak band check inherits that outcome")
    root = _input_dir("fig2")
    result = render(FigureSpec("fig2", root, tmp_path / "fig2.png"))
    t, ratio = result.series[("ratio", "6", "ratio_w_over_e")]
    k = int(np.nanargmax(ratio))
    assert abs(ratio[k] - REFERENCE_N6["ratio"]) <= REFERENCE_N6["ratio_tol"]
    assert abs(t[k] - REFERENCE_N6["t"]) <= REFERENCE_N6["t_tol"]
