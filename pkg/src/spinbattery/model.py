"""Spin-chain battery model: embedded Pauli operators, XYZ Hamiltonian, spectrum.

Conventions (fixed throughout the package):
  * site 1 is the leftmost tensor factor; the computational basis is
    enumerated by the binary value of the bit string, |0> being the
    sigma_z = +1 eigenstate.  With field_h > 0 the all-|1> state is the
    decoupled ground state and sigma_+ = |0><1| raises the energy.
  * dense complex128 matrices everywhere; the hard cap n_sites <= 12
    keeps the 2^N Hilbert space small enough for that.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

MAX_SITES = 12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=np.complex128)   # |0><1|
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=np.complex128)  # |1><0|
IDENTITY_2 = np.eye(2, dtype=np.complex128)

_AXIS_OPS = {
    "x": SIGMA_X,
    "y": SIGMA_Y,
    "z": SIGMA_Z,
    "+": SIGMA_PLUS,
    "-": SIGMA_MINUS,
}


class DegenerateSpectrumError(ValueError):
    """Raised when a spectral gap required for normalization vanishes."""


class DegenerateExtremalWarning(UserWarning):
    """Extremal eigenvalue is (numerically) degenerate; projector tie-broken
    by the eigensolver's stable ordering."""


@dataclass(frozen=True)
class SpinChainParams:
    """Static parameters of the XYZ chain in raw (pre-normalization) units.

    Exactly one of ``coupling_j`` / ``lambda_ratio`` may be omitted; the other
    is derived through lambda = J / |h|.  Giving both requires them to agree.
    """

    n_sites: int
    field_h: float = 1.0
    gamma: float = 0.5
    coupling_jz: float = 0.0
    coupling_j: float | None = None
    lambda_ratio: float | None = None

    def __post_init__(self):
        if not 1 <= self.n_sites <= MAX_SITES:
            raise ValueError(f"n_sites must be in [1, {MAX_SITES}], got {self.n_sites}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.field_h == 0.0:
            raise ValueError("field_h must be nonzero (lambda = J/|h| undefined)")
        j, lam = self.coupling_j, self.lambda_ratio
        if j is None and lam is None:
            raise ValueError("give coupling_j or lambda_ratio")
        if j is None:
            object.__setattr__(self, "coupling_j", lam * abs(self.field_h))
        elif lam is None:
            object.__setattr__(self, "lambda_ratio", j / abs(self.field_h))
        elif j != lam * abs(self.field_h):
            raise ValueError(
                f"inconsistent couplings: coupling_j={j} but "
                f"lambda_ratio*|field_h|={lam * abs(self.field_h)}"
            )

    @property
    def dim(self) -> int:
        return 2 ** self.n_sites


@dataclass(frozen=True)
class SpectrumData:
    """Eigendecomposition bookkeeping for a Hermitian operator.

    ``eigenvalues`` ascending, ``eigenvectors`` column-paired with them.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    e_min: float = field(init=False)
    e_max: float = field(init=False)
    delta_e: float = field(init=False)

    def __post_init__(self):
        evals = np.asarray(self.eigenvalues, dtype=float)
        if np.any(np.diff(evals) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        object.__setattr__(self, "eigenvalues", evals)
        object.__setattr__(self, "e_min", float(evals[0]))
        object.__setattr__(self, "e_max", float(evals[-1]))
        object.__setattr__(self, "delta_e", float(evals[-1] - evals[0]))

    def normalized(self) -> "SpectrumData":
        """Spectrum of (H - E_min)/(E_max - E_min): same eigenvectors,
        eigenvalues affinely mapped onto [0, 1]."""
        if self.delta_e <= 0.0:
            raise DegenerateSpectrumError("cannot normalize a flat spectrum")
        return SpectrumData(
            eigenvalues=(self.eigenvalues - self.e_min) / self.delta_e,
            eigenvectors=self.eigenvectors,
        )


def pauli_site(axis: str, site: int, n_sites: int) -> np.ndarray:
    """I x ... x sigma_axis x ... x I with the single-site operator at
    ``site`` (1-based, leftmost factor is site 1)."""
    if axis not in _AXIS_OPS:
        raise ValueError(f"unknown axis {axis!r}, expected one of {sorted(_AXIS_OPS)}")
    if not 1 <= site <= n_sites:
        raise ValueError(f"site {site} out of range [1, {n_sites}]")
    op = _AXIS_OPS[axis]
    left = 2 ** (site - 1)
    right = 2 ** (n_sites - site)
    return np.kron(np.kron(np.eye(left), op), np.eye(right)).astype(np.complex128)


def build_h0_raw(params: SpinChainParams) -> np.ndarray:
    """Battery Hamiltonian of the open-boundary XYZ chain, raw energy units.

    H0 = (h/2) sum_i sz_i
         + (J/2) sum_i [(1+gamma) sx_i sx_{i+1} + (1-gamma) sy_i sy_{i+1}]
         + (Jz/4) sum_i sz_i sz_{i+1}

    The in-plane prefactor J/2 makes the two-site block carry kappa = J*gamma
    on the antidiagonal corners and J in the center, matching the closed-form
    eigensystem used by the analytic tests.
    """
    n = params.n_sites
    dim = params.dim
    h = np.zeros((dim, dim), dtype=np.complex128)
    for i in range(1, n + 1):
        h += (params.field_h / 2.0) * pauli_site("z", i, n)
    jx = params.coupling_j / 2.0 * (1.0 + params.gamma)
    jy = params.coupling_j / 2.0 * (1.0 - params.gamma)
    for i in range(1, n):
        h += jx * (pauli_site("x", i, n) @ pauli_site("x", i + 1, n))
        h += jy * (pauli_site("y", i, n) @ pauli_site("y", i + 1, n))
        h += (params.coupling_jz / 4.0) * (
            pauli_site("z", i, n) @ pauli_site("z", i + 1, n)
        )
    return h


def normalize_h0(h0: np.ndarray) -> tuple[np.ndarray, SpectrumData]:
    """(H0 - E_min)/(E_max - E_min) plus the raw spectrum.

    The normalized spectrum lies in [0, 1] with the endpoints attained; all
    downstream energies, rates and times are then in units of delta_e.
    """
    herm_dev = np.max(np.abs(h0 - h0.conj().T))
    if herm_dev > 1e-10:
        raise ValueError(f"h0 is not Hermitian (max deviation {herm_dev:.3e})")
    evals, evecs = np.linalg.eigh(h0)
    spectrum = SpectrumData(eigenvalues=evals, eigenvectors=evecs)
    if spectrum.delta_e <= 0.0 or np.isclose(spectrum.delta_e, 0.0):
        raise DegenerateSpectrumError("e_max == e_min: spectrum has no width")
    dim = h0.shape[0]
    h_norm = (h0 - spectrum.e_min * np.eye(dim)) / spectrum.delta_e
    return h_norm, spectrum


def build_hc(n_sites: int, omega: float) -> np.ndarray:
    """Charging drive (omega/2) sum_i sx_i, omega in units of delta_e."""
    if omega <= 0.0:
        raise ValueError(f"omega must be positive, got {omega}")
    dim = 2 ** n_sites
    hc = np.zeros((dim, dim), dtype=np.complex128)
    for i in range(1, n_sites + 1):
        hc += (omega / 2.0) * pauli_site("x", i, n_sites)
    return hc


def extremal_state(spectrum: SpectrumData, which: str, degeneracy_tol: float = 1e-10) -> np.ndarray:
    """Rank-one projector onto the lowest ('ground') or highest ('top')
    eigenvector.  A degenerate extremal level is tie-broken by the solver's
    stable ordering and flagged with DegenerateExtremalWarning."""
    if which == "ground":
        idx, neighbor = 0, 1
    elif which == "top":
        idx, neighbor = -1, -2
    else:
        raise ValueError(f"which must be 'ground' or 'top', got {which!r}")
    evals = spectrum.eigenvalues
    if len(evals) > 1 and abs(evals[idx] - evals[neighbor]) < degeneracy_tol:
        warnings.warn(
            f"extremal eigenvalue {evals[idx]:.12g} is degenerate within "
            f"{degeneracy_tol:g}; projector depends on eigensolver ordering",
            DegenerateExtremalWarning,
            stacklevel=2,
        )
    vec = spectrum.eigenvectors[:, idx]
    return np.outer(vec, vec.conj())
