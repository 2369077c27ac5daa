"""Command-line interface: simulate, sweep, validate, version.

Configs are INI files with sections [chain], [protocol], [time] and
[integrator]; a manifest JSON emitted by a previous run is accepted in place
of the INI (its resolved config echo is reused), which makes every output
directory reproducible from its own manifest.

Exit codes: 0 success, 2 configuration error, 3 integration failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .lindblad import IntegrationError, IntegratorOptions, NoiseChannel
from .model import SpinChainParams, build_h0_raw, normalize_h0
from .protocol import (
    DEFAULT_NOISE_GRID,
    DEFAULT_SIZE_GRID,
    PLATEAU_DRIFT_LIMIT,
    ConfigError,
    ProtocolConfig,
    config_for_value,
    run_protocol,
    summarize,
    sweep,
)
from . import validate as validation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3

WORKERS_ENV = "SPINBATTERY_WORKERS"

CSV_HEADER = [
    "t", "energy", "ergotropy", "power_b", "power_w",
    "purity", "coherence_l1", "trace_distance", "ratio_w_over_e",
]
SUMMARY_HEADER = [
    "value", "ratio_max", "t_ratio_max", "e_plateau", "w_plateau",
    "p_peak", "t_p_peak", "plateau_drift", "error",
]

_REQUIRED = object()

# section -> key -> (converter, default); _REQUIRED keys must be present.
_SCHEMA = {
    "chain": {
        "n": ("int", _REQUIRED),
        "h": ("float", _REQUIRED),
        "lambda": ("float", _REQUIRED),
        "gamma": ("float", _REQUIRED),
        "jz": ("float", _REQUIRED),
    },
    "protocol": {
        "mode": ("str", _REQUIRED),
        "omega": ("float", 0.5),
        "gamma_plus": ("float", 0.0),
        "gamma_minus": ("float", 0.0),
        "noise_axis": ("str", "z"),
        "noise_strength": ("float", 0.0),
        "discharge_init": ("str", "top_eigenstate"),
    },
    "time": {
        "t_max": ("float", 20.0),
        "dt": ("float", 0.005),
        "stride": ("int", 10),
    },
    "integrator": {
        "method": ("str", "fixed-rk4"),
        "rel_tol": ("float", 1e-8),
        "abs_tol": ("float", 1e-10),
    },
}


def _convert(kind: str, value, path: str):
    try:
        if kind == "str":
            return str(value)
        f = float(value)
        if kind == "float":
            return f
        i = int(round(f))
        if f != i:
            raise ValueError
        return i
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value for {path}: {value!r}") from None


def load_raw_config(path: str | Path) -> dict:
    """Read an INI config, or the config echo of a manifest JSON."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        manifest = json.loads(text)
        if "config" not in manifest:
            raise ConfigError(f"{path}: manifest JSON lacks a 'config' entry")
        return manifest["config"]
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return {section: dict(parser[section]) for section in parser.sections()}


def resolve_config(raw: dict) -> dict:
    """Validate against the schema, rejecting unknown keys, and fill defaults
    so the result echoes every parameter."""
    for section in raw:
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key in raw[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown config key {section}.{key}")
    resolved: dict = {}
    for section, keys in _SCHEMA.items():
        resolved[section] = {}
        for key, (kind, default) in keys.items():
            if section in raw and key in raw[section]:
                resolved[section][key] = _convert(kind, raw[section][key], f"{section}.{key}")
            elif default is _REQUIRED:
                raise ConfigError(f"missing required key {section}.{key}")
            else:
                resolved[section][key] = default
    return resolved


def build_protocol_config(resolved: dict) -> ProtocolConfig:
    chain_cfg = resolved["chain"]
    proto = resolved["protocol"]
    time_cfg = resolved["time"]
    integ = resolved["integrator"]
    try:
        chain = SpinChainParams(
            n_sites=chain_cfg["n"],
            field_h=chain_cfg["h"],
            gamma=chain_cfg["gamma"],
            coupling_jz=chain_cfg["jz"],
            lambda_ratio=chain_cfg["lambda"],
        )
        return ProtocolConfig(
            mode=proto["mode"],
            chain=chain,
            omega=proto["omega"],
            gamma_plus=proto["gamma_plus"],
            gamma_minus=proto["gamma_minus"],
            noise=NoiseChannel(proto["noise_axis"], proto["noise_strength"]),
            t_max=time_cfg["t_max"],
            integrator=IntegratorOptions(
                method=integ["method"],
                dt=time_cfg["dt"],
                rel_tol=integ["rel_tol"],
                abs_tol=integ["abs_tol"],
            ),
            output_stride=time_cfg["stride"],
            discharge_init=proto["discharge_init"],
        )
    except (ValueError, ConfigError) as exc:
        raise ConfigError(str(exc)) from None


def fmt(x) -> str:
    """12 significant digits; absent values become empty fields."""
    if x is None:
        return ""
    if isinstance(x, float) and x != x:  # NaN -> absent
        return ""
    return f"{x:.12g}"


def write_metrics_csv(path: Path, records) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow([
                fmt(r.t), fmt(r.energy), fmt(r.ergotropy), fmt(r.power_b),
                fmt(r.power_w), fmt(r.purity), fmt(r.coherence_l1),
                fmt(r.trace_distance), fmt(r.ratio_w_over_e),
            ])


def write_summary_csv(path: Path, entries) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_HEADER)
        for e in entries:
            s = e.stats
            writer.writerow([
                fmt(e.value),
                fmt(s.ratio_max) if s else "",
                fmt(s.t_ratio_max) if s else "",
                fmt(s.e_plateau) if s else "",
                fmt(s.w_plateau) if s else "",
                fmt(s.p_peak) if s else "",
                fmt(s.t_p_peak) if s else "",
                fmt(s.plateau_drift) if s else "",
                e.error or "",
            ])


def run_warnings(diag) -> list[str]:
    notes = list(diag.warnings)
    if diag.clamped_samples:
        notes.append(
            f"{diag.clamped_samples} samples had negative eigenvalues clamped "
            f"for metric evaluation (min {diag.min_eigenvalue:.3e})")
    return notes


def diagnostics_block(diag) -> dict:
    return {
        "max_trace_dev": diag.max_trace_dev,
        "max_herm_dev": diag.max_herm_dev,
        "min_eigenvalue": diag.min_eigenvalue,
        "clamped_samples": diag.clamped_samples,
    }


def write_manifest(
    path: Path,
    command: str,
    resolved: dict,
    outputs: list[str],
    wall_time_s: float,
    warnings_list: list[str],
    extra: dict | None = None,
) -> None:
    chain = SpinChainParams(
        n_sites=resolved["chain"]["n"],
        field_h=resolved["chain"]["h"],
        gamma=resolved["chain"]["gamma"],
        coupling_jz=resolved["chain"]["jz"],
        lambda_ratio=resolved["chain"]["lambda"],
    )
    _, spectrum = normalize_h0(build_h0_raw(chain))
    manifest = {
        "tool": "spinbattery",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "command": command,
        "config": resolved,
        "derived": {
            "coupling_j": chain.coupling_j,
            "dim": chain.dim,
            "delta_e": spectrum.delta_e,
        },
        "outputs": outputs,
        "wall_time_s": wall_time_s,
        "warnings": warnings_list,
    }
    if extra:
        manifest.update(extra)
    with path.open("w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def cmd_simulate(args) -> int:
    try:
        resolved = resolve_config(load_raw_config(args.config))
        cfg = build_protocol_config(resolved)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        result = run_protocol(cfg)
    except IntegrationError as exc:
        print(f"integration failure for mode={cfg.mode} N={cfg.chain.n_sites} "
              f"noise={cfg.noise.axis}:{cfg.noise.strength}: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    wall = time.perf_counter() - start
    write_metrics_csv(out / "metrics.csv", result.records)
    write_manifest(out / "manifest.json", "simulate", resolved, ["metrics.csv"],
                   wall, run_warnings(result.diagnostics),
                   extra={"diagnostics": diagnostics_block(result.diagnostics)})
    print(f"wrote {out / 'metrics.csv'} ({len(result.records)} samples, {wall:.2f}s)")
    return EXIT_OK


def _parse_values(text: str | None, axis: str) -> list[float]:
    if text is None:
        grid = DEFAULT_SIZE_GRID if axis == "chain_size" else DEFAULT_NOISE_GRID
        return [float(v) for v in grid]
    items = [s for s in (piece.strip() for piece in text.split(",")) if s]
    if not items:
        raise ConfigError("sweep --values list is empty")
    return [float(s) for s in items]


def _value_label(axis: str, value: float) -> str:
    return f"{int(value)}" if axis == "chain_size" else f"{value:g}"


def cmd_sweep(args) -> int:
    try:
        resolved = resolve_config(load_raw_config(args.config))
        base = build_protocol_config(resolved)
        values = _parse_values(args.values, args.axis)
        for v in values:  # fail fast on an invalid grid before running anything
            config_for_value(base, args.axis, v)
    except (ConfigError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    workers = args.workers or int(os.environ.get(WORKERS_ENV, "1"))

    start = time.perf_counter()
    entries = sweep(base, args.axis, values, workers=workers)
    wall = time.perf_counter() - start

    outputs = ["summary.csv"]
    for entry in entries:
        label = _value_label(args.axis, entry.value)
        subdir = out / label
        if entry.records is None:
            print(f"run {args.axis}={label} failed: {entry.error}", file=sys.stderr)
            continue
        subdir.mkdir(exist_ok=True)
        sub_resolved = json.loads(json.dumps(resolved))  # deep copy
        if args.axis == "chain_size":
            sub_resolved["chain"]["n"] = int(entry.value)
        else:
            sub_resolved["protocol"]["noise_strength"] = entry.value
        notes = run_warnings(entry.diagnostics)
        if entry.stats.plateau_drift > PLATEAU_DRIFT_LIMIT:
            notes.append(f"final-window drift {entry.stats.plateau_drift:.3g} exceeds "
                         f"{PLATEAU_DRIFT_LIMIT:g}; plateau values are not settled")
        write_metrics_csv(subdir / "metrics.csv", entry.records)
        write_manifest(subdir / "manifest.json", "simulate", sub_resolved,
                       ["metrics.csv"], 0.0, notes,
                       extra={"diagnostics": diagnostics_block(entry.diagnostics)})
        outputs.append(f"{label}/metrics.csv")
    write_summary_csv(out / "summary.csv", entries)
    write_manifest(out / "manifest.json", "sweep", resolved, outputs, wall, [],
                   extra={"sweep_axis": args.axis, "sweep_values": values})
    failed = [e for e in entries if e.error]
    print(f"sweep over {args.axis}: {len(entries) - len(failed)}/{len(entries)} runs ok "
          f"({wall:.2f}s)")
    return EXIT_INTEGRATION if failed else EXIT_OK


def cmd_validate(args) -> int:
    results = validation.run_all(seed=args.seed, inject_perturbation=args.inject_perturbation)
    width = max(len(r.name) for r in results)
    all_ok = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        all_ok &= r.passed
        print(f"{r.name:<{width}}  {status}  {r.detail}")
    print(f"{'overall':<{width}}  {'PASS' if all_ok else 'FAIL'}")
    return EXIT_OK if all_ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="spinbattery",
                                     description="Spin-chain quantum battery simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one protocol and write metrics.csv")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="sweep chain size or noise strength")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--axis", required=True, choices=["chain_size", "noise_strength"])
    p_sweep.add_argument("--values", default=None,
                         help="comma-separated grid (default: benchmark grid for the axis)")
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--workers", type=int, default=None,
                         help=f"worker processes (default ${WORKERS_ENV} or 1)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", help="run the built-in validation suite")
    p_val.add_argument("--seed", type=int, default=1234)
    p_val.add_argument("--inject-perturbation", action="store_true",
                       help=argparse.SUPPRESS)  # test hook: force a failure
    p_val.set_defaults(func=cmd_validate)

    p_ver = sub.add_parser("version", help="print version")
    p_ver.set_defaults(func=lambda _args: (print(f"spinbattery {__version__}"), EXIT_OK)[1])

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
