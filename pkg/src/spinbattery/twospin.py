"""Closed-form two-spin battery: the 4x4 Hamiltonian block structure, its
analytic eigensystem, the polarized initial states, and the explicit
phase-flip master equations for the charging and discharging stages.

Everything here is an independent transcription of the closed forms and is
used as ground truth against the generic machinery in model/lindblad.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    IDENTITY_2,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Z,
    SpinChainParams,
)


@dataclass(frozen=True)
class TwoSpinEigensystem:
    """Closed-form eigendata of the two-spin Hamiltonian.

    eps0/eps3 belong to the (|00>, |11>) block, eps1/eps2 to the
    (|01>, |10>) block; kappa = J*gamma, eta = sqrt(h^2 + kappa^2),
    delta_{-,+} = h -+ eta.  The norm constants are NaN when kappa = 0
    (decoupled limit, eigenvectors are bare basis states).
    """

    eps0: float
    eps1: float
    eps2: float
    eps3: float
    eta: float
    kappa: float
    delta_minus: float
    delta_plus: float
    norm_minus: float
    norm_plus: float


def _require_two_sites(params: SpinChainParams) -> None:
    if params.n_sites != 2:
        raise ValueError(f"two-spin closed forms need n_sites=2, got {params.n_sites}")


def analytic_h0_2(params: SpinChainParams) -> np.ndarray:
    """Explicit 4x4 battery Hamiltonian: mu_+/- = Jz/4 +- h on the outer
    diagonal, -Jz/4 inside, kappa = J*gamma on the antidiagonal corners and
    J in the center block."""
    _require_two_sites(params)
    h, j, jz = params.field_h, params.coupling_j, params.coupling_jz
    kappa = j * params.gamma
    mu_plus = jz / 4.0 + h
    mu_minus = jz / 4.0 - h
    return np.array(
        [
            [mu_plus, 0.0, 0.0, kappa],
            [0.0, -jz / 4.0, j, 0.0],
            [0.0, j, -jz / 4.0, 0.0],
            [kappa, 0.0, 0.0, mu_minus],
        ],
        dtype=np.complex128,
    )


def analytic_eigs_2(params: SpinChainParams) -> TwoSpinEigensystem:
    _require_two_sites(params)
    h, j, jz = params.field_h, params.coupling_j, params.coupling_jz
    kappa = j * params.gamma
    eta = float(np.sqrt(h * h + kappa * kappa))
    delta_minus = h - eta
    delta_plus = h + eta
    if kappa != 0.0:
        norm_minus = ((delta_minus / kappa) ** 2 + 1.0) ** -0.5
        norm_plus = ((delta_plus / kappa) ** 2 + 1.0) ** -0.5
    else:
        norm_minus = norm_plus = float("nan")
    return TwoSpinEigensystem(
        eps0=jz / 4.0 - eta,
        eps1=-jz / 4.0 - j,
        eps2=-jz / 4.0 + j,
        eps3=jz / 4.0 + eta,
        eta=eta,
        kappa=kappa,
        delta_minus=delta_minus,
        delta_plus=delta_plus,
        norm_minus=norm_minus,
        norm_plus=norm_plus,
    )


def eigenvector_2(which: str, params: SpinChainParams) -> np.ndarray:
    """Extremal eigenvector in the (|00>, |11>) block, |11> amplitude fixed
    positive.  'down' is the ground level (eps0), 'up' the top level (eps3)."""
    eigs = analytic_eigs_2(params)
    if which == "down":
        delta = eigs.delta_minus
    elif which == "up":
        delta = eigs.delta_plus
    else:
        raise ValueError(f"which must be 'up' or 'down', got {which!r}")
    vec = np.zeros(4, dtype=np.complex128)
    if eigs.kappa == 0.0:
        # decoupled limit: polarized basis states, ordering set by sign(h)
        ground_is_all_ones = params.field_h > 0
        idx = 3 if (which == "down") == ground_is_all_ones else 0
        vec[idx] = 1.0
        return vec
    vec[0] = delta / eigs.kappa
    vec[3] = 1.0
    return vec / np.linalg.norm(vec)


def rho_initial_2(which: str, params: SpinChainParams) -> np.ndarray:
    """Polarized state of the (|00>, |11>) block:

        [[d^2, 0, 0, kd], [0,0,0,0], [0,0,0,0], [kd, 0, 0, k^2]] / (d^2+k^2)

    with d = delta_- for 'down' (ground, charging start) and d = delta_+ for
    'up' (charged, discharging start).  kappa = 0 routes through the limit.
    """
    vec = eigenvector_2(which, params)
    return np.outer(vec, vec.conj())


def phase_flip_rhs_2(
    rho: np.ndarray,
    mode: str,
    params: SpinChainParams,
    omega: float,
    gamma_plus: float,
    gamma_minus: float,
    gamma_z: float,
) -> np.ndarray:
    """Term-by-term transcription of the explicit two-spin phase-flip master
    equations: charging drives with H0 + Hc and pumps through sigma_+,
    discharging evolves under H0 alone and relaxes through sigma_-; the
    dephasing term sigma_z rho sigma_z - rho acts per site in both modes.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 state, got {rho.shape}")
    sp1 = np.kron(SIGMA_PLUS, IDENTITY_2)
    sp2 = np.kron(IDENTITY_2, SIGMA_PLUS)
    sm1 = np.kron(SIGMA_MINUS, IDENTITY_2)
    sm2 = np.kron(IDENTITY_2, SIGMA_MINUS)
    sz1 = np.kron(SIGMA_Z, IDENTITY_2)
    sz2 = np.kron(IDENTITY_2, SIGMA_Z)

    h0 = analytic_h0_2(params)
    if mode == "charging":
        hc = (omega / 2.0) * (np.kron(SIGMA_X, IDENTITY_2) + np.kron(IDENTITY_2, SIGMA_X))
        h = h0 + hc
        pump = gamma_plus * (
            sp1 @ rho @ sm1
            - 0.5 * (sm1 @ sp1 @ rho + rho @ sm1 @ sp1)
            + sp2 @ rho @ sm2
            - 0.5 * (sm2 @ sp2 @ rho + rho @ sm2 @ sp2)
        )
    elif mode == "discharging":
        h = h0
        pump = gamma_minus * (
            sm1 @ rho @ sp1
            - 0.5 * (sp1 @ sm1 @ rho + rho @ sp1 @ sm1)
            + sm2 @ rho @ sp2
            - 0.5 * (sp2 @ sm2 @ rho + rho @ sp2 @ sm2)
        )
    else:
        raise ValueError(f"mode must be 'charging' or 'discharging', got {mode!r}")

    dephase = gamma_z * (sz1 @ rho @ sz1 + sz2 @ rho @ sz2 - 2.0 * rho)
    return -1j * (h @ rho - rho @ h) + pump + dephase
