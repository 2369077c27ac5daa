"""Open-system simulator for a Heisenberg XYZ spin-chain quantum battery."""

__version__ = "0.1.0"

from .lindblad import (
    CollapseTerm,
    IntegrationError,
    IntegratorOptions,
    NoiseChannel,
    assemble_collapse,
    evolve,
    liouvillian_matrix,
    master_rhs,
)
from .metrics import (
    MetricsRecord,
    coherence_l1,
    discharge_ratio,
    energy,
    ergotropy,
    passive_energy,
    powers,
    purity,
    trace_distance,
)
from .model import (
    SpectrumData,
    SpinChainParams,
    build_h0_raw,
    build_hc,
    extremal_state,
    normalize_h0,
    pauli_site,
)
from .protocol import (
    ProtocolConfig,
    SummaryStats,
    SweepEntry,
    run_charging,
    run_discharging,
    run_protocol,
    summarize,
    sweep,
)
from .twospin import (
    TwoSpinEigensystem,
    analytic_eigs_2,
    analytic_h0_2,
    phase_flip_rhs_2,
    rho_initial_2,
)

__all__ = [
    "CollapseTerm",
    "IntegrationError",
    "IntegratorOptions",
    "MetricsRecord",
    "NoiseChannel",
    "ProtocolConfig",
    "SpectrumData",
    "SpinChainParams",
    "SummaryStats",
    "SweepEntry",
    "TwoSpinEigensystem",
    "analytic_eigs_2",
    "analytic_h0_2",
    "assemble_collapse",
    "build_h0_raw",
    "build_hc",
    "coherence_l1",
    "discharge_ratio",
    "energy",
    "ergotropy",
    "evolve",
    "extremal_state",
    "liouvillian_matrix",
    "master_rhs",
    "normalize_h0",
    "passive_energy",
    "pauli_site",
    "phase_flip_rhs_2",
    "powers",
    "purity",
    "rho_initial_2",
    "run_charging",
    "run_discharging",
    "run_protocol",
    "summarize",
    "sweep",
    "trace_distance",
]
