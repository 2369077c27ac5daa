"""Figures of merit for the battery state.

Energies are in units of delta_e against the NORMALIZED battery Hamiltonian
(ground energy 0, top energy 1).  The l1-coherence is taken in the
computational (tensor product sigma_z) basis, the same basis the site-local
noise operators are defined in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SpectrumData

# rho eigenvalues in (-EIG_CLAMP, 0) are clamped to 0 and renormalized for
# metric evaluation only; the evolving state is never touched.
EIG_CLAMP = 1e-8

ENERGY_FLOOR = 1e-9     # ratio W/E reported only above this
RATIO_DENOM_FLOOR = 1e-12


class NumericalCorruptionError(ValueError):
    """An expectation value came out with a non-negligible imaginary part."""


@dataclass(frozen=True)
class MetricsRecord:
    """One time sample of the battery figures of merit.

    The quantum-information metrics (purity, coherence, trace distance) are
    None for discharge runs, where they are omitted from the outputs;
    ``ratio_w_over_e`` is None whenever energy is below ENERGY_FLOOR and
    ``discharge_ratio`` is populated only in discharge mode.
    """

    t: float
    energy: float
    ergotropy: float
    power_b: float
    power_w: float
    purity: float | None
    coherence_l1: float | None
    trace_distance: float | None
    ratio_w_over_e: float | None
    discharge_ratio: float | None = None


def _real_expectation(value: complex, what: str) -> float:
    if abs(value.imag) >= 1e-8:
        raise NumericalCorruptionError(f"{what} has imaginary part {value.imag:.3e}")
    return float(value.real)


def energy(rho: np.ndarray, h0_normalized: np.ndarray) -> float:
    """E_B = Tr[H0 rho] with the normalized battery Hamiltonian."""
    if rho.shape != h0_normalized.shape:
        raise ValueError(f"dimension mismatch: rho {rho.shape} vs H0 {h0_normalized.shape}")
    return _real_expectation(complex(np.einsum("ij,ji->", h0_normalized, rho)), "energy")


def clamped_populations(rho: np.ndarray, eigenvalues: np.ndarray | None = None) -> np.ndarray:
    """Eigenvalues of rho, descending, with tiny negatives clamped to zero
    and the spectrum renormalized to unit sum.

    ``eigenvalues`` may carry a precomputed ascending spectrum of rho.
    """
    evals = np.linalg.eigvalsh(rho) if eigenvalues is None else np.asarray(eigenvalues)
    if evals[0] < -EIG_CLAMP:
        raise ValueError(f"rho has negative eigenvalue {evals[0]:.3e} beyond clamp tolerance")
    evals = np.clip(evals, 0.0, None)
    evals = evals / evals.sum()
    return evals[::-1]


def passive_energy(
    rho: np.ndarray,
    spectrum: SpectrumData,
    rho_populations: np.ndarray | None = None,
) -> float:
    """Energy of the passive state: rho populations sorted descending paired
    with the (normalized) energy levels sorted ascending.

    ``spectrum`` must come from the normalized Hamiltonian.
    ``rho_populations`` may carry precomputed clamped_populations(rho).
    """
    r = clamped_populations(rho) if rho_populations is None else rho_populations
    return float(np.dot(r, spectrum.eigenvalues))


def ergotropy(
    rho: np.ndarray,
    h0_normalized: np.ndarray,
    spectrum: SpectrumData,
    rho_populations: np.ndarray | None = None,
) -> float:
    """Maximum unitarily extractable work: E_B minus the passive energy.
    Tiny negatives from roundoff are clamped to 0."""
    w = energy(rho, h0_normalized) - passive_energy(rho, spectrum, rho_populations)
    return max(w, 0.0)


def powers(energy_value: float, ergotropy_value: float, t: float) -> tuple[float, float]:
    """Average powers (E_B/t, W/t); both defined as 0 at t = 0."""
    if t < 0.0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return 0.0, 0.0
    return energy_value / t, ergotropy_value / t


def purity(rho: np.ndarray) -> float:
    """Tr[rho^2]."""
    return _real_expectation(complex(np.einsum("ij,ji->", rho, rho)), "purity")


def coherence_l1(rho: np.ndarray) -> float:
    """Sum of |rho_ij| over i != j in the computational basis."""
    a = np.abs(rho)
    return float(a.sum() - np.trace(a))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """(1/2) ||rho - sigma||_1 via the eigenvalues of the difference."""
    if rho.shape != sigma.shape:
        raise ValueError("dimension mismatch between states")
    mu = np.linalg.eigvalsh(rho - sigma)
    return 0.5 * float(np.sum(np.abs(mu)))


def discharge_ratio(e_released_t: float, e_at_discharge_start: float) -> float | None:
    """E*_B(t*) / E*_B(0); None (absent) when the denominator is ~0."""
    if abs(e_at_discharge_start) <= RATIO_DENOM_FLOOR:
        return None
    return e_released_t / e_at_discharge_start


def ratio_w_over_e(energy_value: float, ergotropy_value: float) -> float | None:
    """W/E_B, reported only when E_B exceeds ENERGY_FLOOR."""
    if energy_value <= ENERGY_FLOOR:
        return None
    return ergotropy_value / energy_value
