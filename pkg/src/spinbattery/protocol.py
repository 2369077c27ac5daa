"""Charging and discharging protocols, parameter sweeps, summary statistics.

A protocol run wires the model and engine together: build and normalize the
battery Hamiltonian, pick the initial state, assemble the site-local collapse
set, integrate, and evaluate the metrics at every recorded sample.  Sweeps
fan independent runs over a grid of chain sizes or noise strengths.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .lindblad import (
    IntegratorOptions,
    NoiseChannel,
    assemble_collapse,
    evolve,
)
from .metrics import (
    MetricsRecord,
    clamped_populations,
    coherence_l1,
    discharge_ratio,
    energy,
    ergotropy,
    powers,
    purity,
    ratio_w_over_e,
    trace_distance,
)
from .model import SpinChainParams, build_h0_raw, build_hc, extremal_state, normalize_h0

MODES = ("charging", "discharging")
DISCHARGE_INITS = ("top_eigenstate", "end_of_charge")

# Benchmark sweep grids.
DEFAULT_NOISE_GRID = (0.0, 0.01, 0.03, 0.05, 0.07, 0.1, 0.3, 0.5)
DEFAULT_SIZE_GRID = (2, 3, 4, 5, 6, 7, 8)

# Pump rate of the pre-charge phase used by discharge_init="end_of_charge".
DEFAULT_CHARGE_RATE = 0.01

PLATEAU_WINDOW = 0.10       # final fraction of the grid averaged for plateaus
PLATEAU_DRIFT_LIMIT = 0.01  # relative drift above this flags a non-plateau


class ConfigError(ValueError):
    """Protocol configuration violates an invariant."""


@dataclass(frozen=True)
class ProtocolConfig:
    mode: str
    chain: SpinChainParams
    omega: float
    gamma_plus: float
    gamma_minus: float
    noise: NoiseChannel
    t_max: float = 20.0
    integrator: IntegratorOptions = field(default_factory=IntegratorOptions)
    output_stride: int = 10
    discharge_init: str = "top_eigenstate"
    # exploration hook: extra simultaneous channels on top of `noise`
    extra_noise: tuple[NoiseChannel, ...] = ()

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"protocol.mode must be one of {MODES}, got {self.mode!r}")
        if self.gamma_plus < 0.0 or self.gamma_minus < 0.0:
            raise ConfigError("protocol rates must be >= 0")
        if self.omega < 0.0:
            raise ConfigError("protocol.omega must be >= 0")
        if self.mode == "charging":
            if self.gamma_minus != 0.0:
                raise ConfigError("charging requires protocol.gamma_minus = 0")
        else:
            if self.gamma_plus != 0.0:
                raise ConfigError("discharging requires protocol.gamma_plus = 0")
            if self.discharge_init == "end_of_charge" and self.omega <= 0.0:
                raise ConfigError("discharge_init=end_of_charge needs protocol.omega > 0 "
                                  "for the pre-charge phase")
        if self.t_max <= 0.0:
            raise ConfigError("time.t_max must be > 0")
        if self.output_stride < 1:
            raise ConfigError("time.stride must be >= 1")
        if self.discharge_init not in DISCHARGE_INITS:
            raise ConfigError(
                f"protocol.discharge_init must be one of {DISCHARGE_INITS}, "
                f"got {self.discharge_init!r}")


@dataclass(frozen=True)
class RunDiagnostics:
    """Trajectory health collected along a run (CPTP bookkeeping)."""

    max_trace_dev: float
    max_herm_dev: float
    min_eigenvalue: float
    clamped_samples: int
    warnings: tuple[str, ...]


@dataclass(frozen=True)
class RunResult:
    records: list[MetricsRecord]
    diagnostics: RunDiagnostics
    t_grid: np.ndarray
    initial_state: np.ndarray
    final_state: np.ndarray
    states: np.ndarray | None = None


@dataclass(frozen=True)
class SummaryStats:
    """Scalar summary of one run; maxima tie-break toward earliest time and
    plateaus average the final window of the grid."""

    ratio_max: float
    t_ratio_max: float
    e_plateau: float
    w_plateau: float
    p_peak: float
    t_p_peak: float
    plateau_drift: float


@dataclass(frozen=True)
class SweepEntry:
    value: float
    stats: SummaryStats | None
    records: list[MetricsRecord] | None
    diagnostics: RunDiagnostics | None = None
    error: str | None = None


def time_grid(t_max: float, dt: float, stride: int) -> np.ndarray:
    """Sample times: every stride-th integrator step plus the final step."""
    n_steps = int(round(t_max / dt))
    if n_steps < 1:
        raise ConfigError("t_max shorter than one integrator step")
    idx = np.arange(0, n_steps + 1, stride)
    if idx[-1] != n_steps:
        idx = np.append(idx, n_steps)
    return idx * dt


def _noise_channels(cfg: ProtocolConfig) -> list[NoiseChannel]:
    return [cfg.noise, *cfg.extra_noise]


def run_protocol(cfg: ProtocolConfig, keep_states: bool = False) -> RunResult:
    """Execute one charging or discharging run and evaluate all metrics."""
    h0_raw = build_h0_raw(cfg.chain)
    h0n, spectrum_raw = normalize_h0(h0_raw)
    spectrum_n = spectrum_raw.normalized()
    n = cfg.chain.n_sites

    caught: list[str] = []
    with warnings.catch_warnings(record=True) as wlist:
        warnings.simplefilter("always")
        if cfg.mode == "charging":
            rho0 = extremal_state(spectrum_raw, "ground")
            # omega = 0 is the driveless baseline (stationary ground state)
            h_total = h0n + build_hc(n, cfg.omega) if cfg.omega > 0.0 else h0n
            terms = assemble_collapse(n, cfg.gamma_plus, 0.0, _noise_channels(cfg))
        else:
            if cfg.discharge_init == "top_eigenstate":
                rho0 = extremal_state(spectrum_raw, "top")
            else:
                pre = replace(
                    cfg,
                    mode="charging",
                    gamma_plus=DEFAULT_CHARGE_RATE,
                    gamma_minus=0.0,
                    discharge_init="top_eigenstate",
                )
                rho0 = run_protocol(pre).final_state
            h_total = h0n
            terms = assemble_collapse(n, 0.0, cfg.gamma_minus, _noise_channels(cfg))
    caught.extend(str(w.message) for w in wlist)

    t_grid = time_grid(cfg.t_max, cfg.integrator.dt, cfg.output_stride)
    traj = evolve(rho0, h_total, terms, t_grid, cfg.integrator)

    records: list[MetricsRecord] = []
    max_trace_dev = 0.0
    max_herm_dev = 0.0
    min_eig = np.inf
    clamped = 0
    e_start = None
    for t, rho in zip(t_grid, traj):
        evals = np.linalg.eigvalsh(rho)
        min_eig = min(min_eig, float(evals[0]))
        if evals[0] < 0.0:
            clamped += 1
        pops = clamped_populations(rho, eigenvalues=evals)
        max_trace_dev = max(max_trace_dev, abs(np.trace(rho) - 1.0))
        max_herm_dev = max(max_herm_dev, float(np.max(np.abs(rho - rho.conj().T))))

        e = energy(rho, h0n)
        w = ergotropy(rho, h0n, spectrum_n, rho_populations=pops)
        p_b, p_w = powers(e, w, float(t))
        if cfg.mode == "charging":
            pur, coh, dist = purity(rho), coherence_l1(rho), trace_distance(rho, rho0)
            d_ratio = None
        else:
            # information metrics are omitted from discharge outputs
            pur = coh = dist = None
            if e_start is None:
                e_start = e
            d_ratio = discharge_ratio(e, e_start)
        records.append(
            MetricsRecord(
                t=float(t),
                energy=e,
                ergotropy=w,
                power_b=p_b,
                power_w=p_w,
                purity=pur,
                coherence_l1=coh,
                trace_distance=dist,
                ratio_w_over_e=ratio_w_over_e(e, w),
                discharge_ratio=d_ratio,
            )
        )

    diag = RunDiagnostics(
        max_trace_dev=float(max_trace_dev),
        max_herm_dev=float(max_herm_dev),
        min_eigenvalue=float(min_eig),
        clamped_samples=clamped,
        warnings=tuple(caught),
    )
    return RunResult(
        records=records,
        diagnostics=diag,
        t_grid=t_grid,
        initial_state=rho0,
        final_state=traj[-1],
        states=traj if keep_states else None,
    )


def run_charging(cfg: ProtocolConfig) -> list[MetricsRecord]:
    if cfg.mode != "charging":
        raise ConfigError("run_charging requires mode=charging")
    return run_protocol(cfg).records


def run_discharging(cfg: ProtocolConfig) -> list[MetricsRecord]:
    if cfg.mode != "discharging":
        raise ConfigError("run_discharging requires mode=discharging")
    return run_protocol(cfg).records


def summarize(records: list[MetricsRecord]) -> SummaryStats:
    if not records:
        raise ValueError("cannot summarize an empty record list")
    t = np.array([r.t for r in records])
    e = np.array([r.energy for r in records])
    w = np.array([r.ergotropy for r in records])
    p_b = np.array([r.power_b for r in records])

    ratios = [(r.ratio_w_over_e, r.t) for r in records if r.ratio_w_over_e is not None]
    if ratios:
        vals = np.array([x[0] for x in ratios])
        k = int(np.argmax(vals))  # argmax returns the earliest maximum
        ratio_max, t_ratio_max = float(vals[k]), float(ratios[k][1])
    else:
        ratio_max, t_ratio_max = float("nan"), float("nan")

    k = int(np.argmax(p_b))
    p_peak, t_p_peak = float(p_b[k]), float(t[k])

    window = t >= t[-1] * (1.0 - PLATEAU_WINDOW)
    e_win, w_win = e[window], w[window]
    e_plateau = float(e_win.mean())
    w_plateau = float(w_win.mean())

    def rel_drift(x: np.ndarray) -> float:
        m = abs(x.mean())
        return float((x.max() - x.min()) / m) if m > 0 else 0.0

    return SummaryStats(
        ratio_max=ratio_max,
        t_ratio_max=t_ratio_max,
        e_plateau=e_plateau,
        w_plateau=w_plateau,
        p_peak=p_peak,
        t_p_peak=t_p_peak,
        plateau_drift=max(rel_drift(e_win), rel_drift(w_win)),
    )


def config_for_value(base: ProtocolConfig, axis: str, value: float) -> ProtocolConfig:
    if axis == "noise_strength":
        return replace(base, noise=NoiseChannel(base.noise.axis, float(value)))
    if axis == "chain_size":
        n = int(value)
        if n != value:
            raise ConfigError(f"chain_size values must be integers, got {value}")
        return replace(base, chain=replace(base.chain, n_sites=n))
    raise ConfigError(f"unknown sweep axis {axis!r}")


def _sweep_run(cfg: ProtocolConfig) -> tuple[list[MetricsRecord], SummaryStats, RunDiagnostics]:
    result = run_protocol(cfg)
    return result.records, summarize(result.records), result.diagnostics


def sweep(
    base: ProtocolConfig,
    axis: str,
    values: list[float],
    workers: int = 1,
) -> list[SweepEntry]:
    """One independent run per value; failures are recorded and the sweep
    continues.  Results come back in input order regardless of worker count.
    """
    if not values:
        raise ConfigError("sweep needs a nonempty value list")
    if axis not in ("noise_strength", "chain_size"):
        raise ConfigError(f"unknown sweep axis {axis!r}")
    entries: list[SweepEntry] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = []
            for v in values:
                try:
                    futures.append(pool.submit(_sweep_run, config_for_value(base, axis, v)))
                except Exception as exc:  # noqa: BLE001 - per-run isolation
                    futures.append(exc)
            for value, fut in zip(values, futures):
                try:
                    if isinstance(fut, Exception):
                        raise fut
                    records, stats, diag = fut.result()
                    entries.append(SweepEntry(value, stats, records, diag))
                except Exception as exc:  # noqa: BLE001
                    entries.append(SweepEntry(value, None, None, error=str(exc)))
    else:
        for value in values:
            try:
                records, stats, diag = _sweep_run(config_for_value(base, axis, value))
                entries.append(SweepEntry(value, stats, records, diag))
            except Exception as exc:  # noqa: BLE001
                entries.append(SweepEntry(value, None, None, error=str(exc)))
    return entries
