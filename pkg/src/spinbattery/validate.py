"""Built-in validation suite behind the `validate` CLI subcommand.

Cross-checks the generic machinery against independent routes: closed-form
two-spin results, the explicit phase-flip generators, the superoperator
matrix exponential, and textbook single-qubit decay laws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .lindblad import (
    CollapseTerm,
    IntegratorOptions,
    NoiseChannel,
    assemble_collapse,
    evolve,
    liouvillian_matrix,
    master_rhs,
    unvec,
    vec,
)
from .metrics import trace_distance
from .model import SIGMA_MINUS, SIGMA_Z, SpinChainParams, build_h0_raw, build_hc, normalize_h0, pauli_site
from .twospin import analytic_eigs_2, analytic_h0_2, phase_flip_rhs_2, rho_initial_2


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_params_2(rng: np.random.Generator) -> SpinChainParams:
    return SpinChainParams(
        n_sites=2,
        field_h=float(rng.uniform(0.2, 2.0)),
        gamma=float(rng.uniform(0.05, 1.0)),
        coupling_jz=float(rng.uniform(-1.0, 1.0)),
        coupling_j=float(rng.uniform(0.05, 1.5)),
    )


def random_params_battery(rng: np.random.Generator, n_sites: int = 2) -> SpinChainParams:
    """Field-dominant (paramagnetic) draws where the polarized closed-form
    state is guaranteed to be the global ground level: lambda <= 0.7 and
    |Jz| <= 0.3 |h| keep the (00,11) block extremal."""
    h = float(rng.uniform(0.5, 2.0))
    return SpinChainParams(
        n_sites=n_sites,
        field_h=h,
        gamma=float(rng.uniform(0.1, 1.0)),
        coupling_jz=float(rng.uniform(-0.3, 0.3)) * h,
        lambda_ratio=float(rng.uniform(0.05, 0.7)),
    )


def check_pauli_identities() -> CheckResult:
    worst = 0.0
    for n in (1, 2, 3):
        for site in range(1, n + 1):
            sx = pauli_site("x", site, n)
            sy = pauli_site("y", site, n)
            sp = pauli_site("+", site, n)
            sm = pauli_site("-", site, n)
            worst = max(worst, float(np.max(np.abs(sp - (sx + 1j * sy) / 2))))
            worst = max(worst, float(np.max(np.abs(sm - (sx - 1j * sy) / 2))))
        for s1 in range(1, n + 1):
            for s2 in range(s1 + 1, n + 1):
                a = pauli_site("x", s1, n)
                b = pauli_site("y", s2, n)
                worst = max(worst, float(np.max(np.abs(a @ b - b @ a))))
    return CheckResult("pauli-identities", worst < 1e-14, f"max deviation {worst:.2e}")


def check_two_spin_eigensystem(rng: np.random.Generator, draws: int = 200,
                               perturb: float = 0.0) -> CheckResult:
    worst = 0.0
    for _ in range(draws):
        params = random_params_2(rng)
        eigs = analytic_eigs_2(params)
        closed = np.sort([eigs.eps0, eigs.eps1, eigs.eps2, eigs.eps3])
        numeric = np.linalg.eigvalsh(build_h0_raw(params) + perturb)
        worst = max(worst, float(np.max(np.abs(closed - numeric))))
    return CheckResult("two-spin-eigenvalues", worst < 1e-10, f"max |closed-numeric| {worst:.2e}")


def check_two_spin_ground_state(rng: np.random.Generator, draws: int = 50) -> CheckResult:
    worst = 0.0
    for _ in range(draws):
        params = random_params_battery(rng)
        _, spectrum = normalize_h0(build_h0_raw(params))
        v = spectrum.eigenvectors[:, 0]
        numeric = np.outer(v, v.conj())
        worst = max(worst, float(np.max(np.abs(rho_initial_2("down", params) - numeric))))
    return CheckResult("two-spin-ground-projector", worst < 1e-12, f"max deviation {worst:.2e}")


def check_generator_equivalence(rng: np.random.Generator, draws: int = 50) -> CheckResult:
    worst = 0.0
    for _ in range(draws):
        params = random_params_2(rng)
        omega = float(rng.uniform(0.1, 0.9))
        g_plus = float(rng.uniform(0.0, 0.5))
        g_minus = float(rng.uniform(0.0, 0.5))
        g_z = float(rng.uniform(0.0, 0.5))
        rho = random_density(rng, 4)
        h0 = analytic_h0_2(params)

        lhs = phase_flip_rhs_2(rho, "charging", params, omega, g_plus, 0.0, g_z)
        rhs = master_rhs(rho, h0 + build_hc(2, omega),
                         assemble_collapse(2, g_plus, 0.0, NoiseChannel("z", g_z)))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))

        lhs = phase_flip_rhs_2(rho, "discharging", params, 0.0, 0.0, g_minus, g_z)
        rhs = master_rhs(rho, h0, assemble_collapse(2, 0.0, g_minus, NoiseChannel("z", g_z)))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return CheckResult("phase-flip-generator", worst < 1e-12, f"max |analytic-engine| {worst:.2e}")


def expm_trajectory(rho0: np.ndarray, h: np.ndarray, terms: list[CollapseTerm],
                    t_grid: np.ndarray) -> np.ndarray:
    """Oracle: propagate vec(rho) with the Liouvillian matrix exponential."""
    liouv = liouvillian_matrix(h, terms)
    out = np.empty((len(t_grid), *rho0.shape), dtype=np.complex128)
    for i, t in enumerate(t_grid):
        out[i] = unvec(scipy.linalg.expm(liouv * t) @ vec(rho0))
    return out


def _random_open_system(rng: np.random.Generator, n_sites: int):
    params = SpinChainParams(
        n_sites=n_sites,
        field_h=float(rng.uniform(0.2, 2.0)),
        gamma=float(rng.uniform(0.0, 1.0)),
        coupling_jz=float(rng.uniform(-1.0, 1.0)),
        coupling_j=float(rng.uniform(-1.5, 1.5)),
    )
    h0n, _ = normalize_h0(build_h0_raw(params))
    h = h0n + build_hc(n_sites, float(rng.uniform(0.1, 0.9)))
    axis = rng.choice(["x", "z", "y"])
    terms = assemble_collapse(
        n_sites,
        float(rng.uniform(0.0, 0.5)),
        float(rng.uniform(0.0, 0.5)),
        NoiseChannel(str(axis), float(rng.uniform(0.0, 0.5))),
    )
    return h, terms


def check_expm_oracle(rng: np.random.Generator, draws_per_size: int = 7,
                      sizes=(1, 2, 3)) -> CheckResult:
    """evolve() against the matrix-exponential oracle, trace-norm distance."""
    worst = 0.0
    t_grid = np.linspace(0.0, 9.0, 10)
    for n in sizes:
        for _ in range(draws_per_size):
            h, terms = _random_open_system(rng, n)
            rho0 = random_density(rng, 2 ** n)
            traj = evolve(rho0, h, terms, t_grid, IntegratorOptions(dt=0.005))
            oracle = expm_trajectory(rho0, h, terms, t_grid)
            for a, b in zip(traj, oracle):
                dist = float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))
                worst = max(worst, dist)
    return CheckResult("expm-oracle", worst < 1e-6, f"max trace-norm error {worst:.2e}")


def check_decay_laws() -> CheckResult:
    """Single-qubit dephasing exp(-2 Gz t) and relaxation exp(-Gm t)."""
    worst = 0.0
    h = np.zeros((2, 2), dtype=np.complex128)
    t_grid = np.array([0.0, 1.0, 10.0, 50.0])

    g_z = 0.05
    rho0 = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=np.complex128)
    traj = evolve(rho0, h, [CollapseTerm(g_z, SIGMA_Z)], t_grid)
    for t, rho in zip(t_grid, traj):
        expected = 0.5 * np.exp(-2.0 * g_z * t)
        worst = max(worst, abs(rho[0, 1].real - expected) / expected)

    g_m = 0.01
    rho0 = np.diag([1.0, 0.0]).astype(np.complex128)
    traj = evolve(rho0, h, [CollapseTerm(g_m, SIGMA_MINUS)], t_grid)
    for t, rho in zip(t_grid, traj):
        expected = np.exp(-g_m * t)
        worst = max(worst, abs(rho[0, 0].real - expected) / expected)
    return CheckResult("analytic-decay-laws", worst < 1e-8, f"max relative error {worst:.2e}")


def check_cptp_health(rng: np.random.Generator) -> CheckResult:
    """Trace/Hermiticity preservation and trace-distance contractivity."""
    h, terms = _random_open_system(rng, 2)
    t_grid = np.linspace(0.0, 10.0, 21)
    worst_trace = 0.0
    worst_herm = 0.0
    worst_growth = 0.0
    for _ in range(5):
        a = evolve(random_density(rng, 4), h, terms, t_grid)
        b = evolve(random_density(rng, 4), h, terms, t_grid)
        for rho in a:
            worst_trace = max(worst_trace, abs(np.trace(rho) - 1.0))
            worst_herm = max(worst_herm, float(np.max(np.abs(rho - rho.conj().T))))
        dists = [trace_distance(x, y) for x, y in zip(a, b)]
        worst_growth = max(worst_growth, float(np.max(np.diff(dists))))
    ok = worst_trace < 1e-9 and worst_herm < 1e-10 and worst_growth < 1e-9
    return CheckResult(
        "cptp-health", ok,
        f"trace dev {worst_trace:.2e}, herm dev {worst_herm:.2e}, "
        f"max distance growth {worst_growth:.2e}")


def run_all(seed: int = 1234, inject_perturbation: bool = False) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results = [
        check_pauli_identities(),
        check_two_spin_eigensystem(rng, perturb=1e-3 if inject_perturbation else 0.0),
        check_two_spin_ground_state(rng),
        check_generator_equivalence(rng),
        check_expm_oracle(rng),
        check_decay_laws(),
        check_cptp_health(rng),
    ]
    return results
