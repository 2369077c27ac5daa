"""GKSL master-equation engine.

Collapse-operator assembly, the dissipative right-hand side, fixed- and
adaptive-step integration of the dense matrix ODE, and a column-stacked
superoperator for the matrix-exponential oracle.

The integrator marches the full dim x dim density matrix.  ``evolve``
precompiles the generator into sparse form (the Hamiltonian and every
site-local collapse operator have O(N * dim) nonzeros), which keeps one RK
stage at O(N * dim^2) instead of the O(dim^3) of naive dense products.  The
dim^2 x dim^2 Liouvillian is built only by ``liouvillian_matrix`` and is
reserved for oracle checks at small dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .model import pauli_site

NOISE_AXES = ("x", "z", "y")  # bit-flip, phase-flip, bit-phase-flip

LIOUVILLIAN_MAX_DIM = 64

# Positivity slack: eigenvalues above this are integrator noise, below it the
# trajectory is declared broken.
POSITIVITY_FAIL = -1e-6


class IntegrationError(RuntimeError):
    """Integration failed; ``t`` carries the offending time."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (at t={t:g})")
        self.t = t


@dataclass(frozen=True)
class NoiseChannel:
    """One local Pauli noise channel: axis in {x, z, y}, strength Gamma/dE."""

    axis: str
    strength: float

    def __post_init__(self):
        if self.axis not in NOISE_AXES:
            raise ValueError(f"noise axis must be one of {NOISE_AXES}, got {self.axis!r}")
        if not 0.0 <= self.strength <= 1.0:
            raise ValueError(f"noise strength must be in [0, 1], got {self.strength}")


@dataclass(frozen=True)
class CollapseTerm:
    rate: float
    operator: np.ndarray

    def __post_init__(self):
        if self.rate < 0.0:
            raise ValueError(f"collapse rate must be >= 0, got {self.rate}")


@dataclass(frozen=True)
class IntegratorOptions:
    method: str = "fixed-rk4"
    dt: float = 0.005
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step_shrink: int = 40

    def __post_init__(self):
        if self.method not in ("fixed-rk4", "adaptive-rk45"):
            raise ValueError(f"unknown integrator method {self.method!r}")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be positive")


def assemble_collapse(
    n_sites: int,
    gamma_plus: float,
    gamma_minus: float,
    noise: NoiseChannel | list[NoiseChannel] | tuple[NoiseChannel, ...],
) -> list[CollapseTerm]:
    """Site-local collapse terms: sigma_+ at gamma_plus, sigma_- at
    gamma_minus, sigma_axis at each channel strength.  Zero-rate terms are
    dropped, so the list length is n_sites times the number of active rates.
    """
    if gamma_plus < 0.0 or gamma_minus < 0.0:
        raise ValueError("rates must be >= 0")
    channels = [noise] if isinstance(noise, NoiseChannel) else list(noise)
    terms: list[CollapseTerm] = []
    for rate, axis in [(gamma_plus, "+"), (gamma_minus, "-")] + [
        (ch.strength, ch.axis) for ch in channels
    ]:
        if rate == 0.0:
            continue
        for site in range(1, n_sites + 1):
            terms.append(CollapseTerm(rate=rate, operator=pauli_site(axis, site, n_sites)))
    return terms


def master_rhs(rho: np.ndarray, h_total: np.ndarray, terms: list[CollapseTerm]) -> np.ndarray:
    """d(rho)/dt = -i[H, rho] + sum_k Gamma_k (L rho L+ - (1/2){L+L, rho}).

    Trace-free for any input and Hermitian whenever rho is.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    h = np.asarray(h_total, dtype=np.complex128)
    if rho.shape != h.shape:
        raise ValueError(f"dimension mismatch: rho {rho.shape} vs H {h.shape}")
    out = -1j * (h @ rho - rho @ h)
    for term in terms:
        L = np.asarray(term.operator, dtype=np.complex128)
        if L.shape != rho.shape:
            raise ValueError(f"dimension mismatch: collapse op {L.shape} vs rho {rho.shape}")
        Ld = L.conj().T
        LdL = Ld @ L
        out += term.rate * (L @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL))
    return out


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacked vectorization (Fortran order)."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    dim = int(round(np.sqrt(v.size)))
    return np.asarray(v).reshape(dim, dim, order="F")


def liouvillian_matrix(h_total: np.ndarray, terms: list[CollapseTerm]) -> np.ndarray:
    """Superoperator L with vec(master_rhs(rho)) = L @ vec(rho), column-stacked:

    L = -i(I(x)H - H^T(x)I) + sum Gamma [conj(L)(x)L
        - (1/2) I(x)(L+L) - (1/2) (L+L)^T(x)I]

    Memory is dim^4; capped at dim <= 64 (oracle use only).
    """
    h = np.asarray(h_total, dtype=np.complex128)
    dim = h.shape[0]
    if dim > LIOUVILLIAN_MAX_DIM:
        raise ValueError(f"dim {dim} exceeds Liouvillian cap {LIOUVILLIAN_MAX_DIM}")
    eye = np.eye(dim, dtype=np.complex128)
    liouv = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for term in terms:
        L = np.asarray(term.operator, dtype=np.complex128)
        LdL = L.conj().T @ L
        liouv += term.rate * (
            np.kron(L.conj(), L)
            - 0.5 * np.kron(eye, LdL)
            - 0.5 * np.kron(LdL.T, eye)
        )
    return liouv


def check_density_matrix(
    rho: np.ndarray,
    trace_tol: float = 1e-9,
    herm_tol: float = 1e-10,
    positivity_tol: float = 1e-8,
) -> None:
    """Raise ValueError unless rho is trace-one, Hermitian and PSD within
    the stated tolerances."""
    trace_dev = abs(np.trace(rho) - 1.0)
    if trace_dev > trace_tol:
        raise ValueError(f"trace deviates from 1 by {trace_dev:.3e}")
    herm_dev = np.max(np.abs(rho - rho.conj().T))
    if herm_dev > herm_tol:
        raise ValueError(f"Hermiticity violated by {herm_dev:.3e}")
    min_eig = float(np.linalg.eigvalsh(rho)[0])
    if min_eig < -positivity_tol:
        raise ValueError(f"negative eigenvalue {min_eig:.3e}")


# The folded jump superoperator has sum_k nnz(L_k)^2 entries; above this cap
# (reached only beyond N=10 site-local terms) fall back to sandwich products.
_JUMP_SUPEROP_NNZ_CAP = 8_000_000


class _Generator:
    """Precompiled GKSL generator.

    Folds the commutator and the anticommutator halves into an effective
    non-Hermitian G = -iH - (1/2) sum Gamma L+L, so one evaluation is
        rhs(rho) = G rho + rho G+ + sum Gamma L rho L+.
    G stays sparse (the chain Hamiltonian has O(N * dim) nonzeros) and the
    whole jump sum collapses into one sparse matrix-vector product with
        S = sum Gamma (L (x) conj(L))
    acting on the row-major flattened state (site-local L keep S small).
    """

    def __init__(self, h_total: np.ndarray, terms: list[CollapseTerm]):
        h = np.asarray(h_total, dtype=np.complex128)
        self.dim = h.shape[0]
        g = -1j * h
        self._sandwich: list[tuple[float, scipy.sparse.csr_matrix]] = []
        self._jump_super = None
        ops = []
        for term in terms:
            L = np.asarray(term.operator, dtype=np.complex128)
            if L.shape != h.shape:
                raise ValueError(f"dimension mismatch: collapse op {L.shape} vs H {h.shape}")
            g = g - 0.5 * term.rate * (L.conj().T @ L)
            ops.append((term.rate, scipy.sparse.csr_matrix(L)))
        self._g = scipy.sparse.csr_matrix(g)
        self._g_conj = scipy.sparse.csr_matrix(g.conj())
        if ops and sum(L.nnz ** 2 for _, L in ops) <= _JUMP_SUPEROP_NNZ_CAP:
            acc = sum(rate * scipy.sparse.kron(L, L.conj()) for rate, L in ops)
            self._jump_super = scipy.sparse.csr_matrix(acc)
        else:
            self._sandwich = ops

    def _jump_sum(self, rho: np.ndarray) -> np.ndarray:
        if self._jump_super is not None:
            return (self._jump_super @ rho.ravel()).reshape(self.dim, self.dim)
        out = np.zeros_like(rho)
        for rate, L in self._sandwich:
            z = L @ rho
            # L rho L+ == (L (L rho)+)+ for any rho
            out += rate * (L @ z.conj().T).conj().T
        return out

    def rhs(self, rho: np.ndarray) -> np.ndarray:
        """Generic evaluation, valid for any (not necessarily Hermitian) input."""
        out = self._g @ rho
        out = out + (self._g_conj @ rho.T).T  # rho @ G+ without forming G+
        if self._jump_super is not None or self._sandwich:
            out = out + self._jump_sum(np.ascontiguousarray(rho))
        return out

    def rhs_h(self, rho: np.ndarray) -> np.ndarray:
        """Evaluation for Hermitian input, where rho G+ = (G rho)+ saves one
        product.

        The output is symmetrized to be Hermitian to the last bit: an
        anti-Hermitian rounding residue would otherwise be propagated by
        G n + (G n)+, which is not the GKSL action on that sector and can
        amplify the residue exponentially over long trajectories.
        """
        gr = self._g @ rho
        out = gr + gr.conj().T
        if self._jump_super is not None or self._sandwich:
            j = self._jump_sum(rho)
            j = j + j.conj().T
            j *= 0.5
            out += j
        return out


def _rk4_segment(gen: _Generator, rho: np.ndarray, t0: float, t1: float, dt: float) -> np.ndarray:
    """Classic RK4 from t0 to t1 with steps of (approximately) dt."""
    span = t1 - t0
    n_steps = max(1, int(round(span / dt)))
    h = span / n_steps
    for _ in range(n_steps):
        k1 = gen.rhs_h(rho)
        k2 = gen.rhs_h(rho + (0.5 * h) * k1)
        k3 = gen.rhs_h(rho + (0.5 * h) * k2)
        k4 = gen.rhs_h(rho + h * k3)
        # in-place accumulation of (k1 + 2 k2 + 2 k3 + k4) * h/6
        k2 += k3
        k2 *= 2.0
        k2 += k1
        k2 += k4
        k2 *= h / 6.0
        rho = rho + k2
    return rho


# Dormand-Prince 5(4) tableau.
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


def _rk45_segment(
    gen: _Generator,
    rho: np.ndarray,
    t0: float,
    t1: float,
    opts: IntegratorOptions,
    h_init: float,
) -> tuple[np.ndarray, float]:
    """Adaptive Dormand-Prince 5(4) from t0 to t1; returns state and the last
    accepted step size (reused as the next segment's initial step)."""
    t = t0
    h = min(h_init, t1 - t0)
    shrink_run = 0
    while t < t1 - 1e-14 * max(1.0, t1):
        h = min(h, t1 - t)
        k = [gen.rhs_h(rho)]
        for row in _DP_A[1:]:
            stage = rho
            for a, ki in zip(row, k):
                if a != 0.0:
                    stage = stage + (h * a) * ki
            k.append(gen.rhs_h(stage))
        rho5 = rho
        err = np.zeros_like(rho)
        for b5, b4, ki in zip(_DP_B5, _DP_B4, k):
            if b5 != 0.0:
                rho5 = rho5 + (h * b5) * ki
            if b5 != b4:
                err = err + (h * (b5 - b4)) * ki
        scale = opts.abs_tol + opts.rel_tol * np.maximum(np.abs(rho), np.abs(rho5))
        err_norm = float(np.max(np.abs(err) / scale))
        if err_norm <= 1.0:
            t += h
            rho = rho5
            shrink_run = 0
            factor = 5.0 if err_norm == 0.0 else min(5.0, 0.9 * err_norm ** -0.2)
            h *= max(factor, 0.2)
        else:
            shrink_run += 1
            if shrink_run > opts.max_step_shrink:
                raise IntegrationError("adaptive step-size underflow", t)
            h *= max(0.2, 0.9 * err_norm ** -0.2)
            if h < 1e-14 * max(1.0, abs(t)):
                raise IntegrationError("adaptive step-size underflow", t)
    return rho, h


def evolve(
    rho0: np.ndarray,
    h_total: np.ndarray,
    terms: list[CollapseTerm],
    t_grid: np.ndarray,
    opts: IntegratorOptions | None = None,
) -> np.ndarray:
    """Integrate the master equation, sampling the state at ``t_grid``.

    ``t_grid`` must be strictly increasing and start at 0.  Returns an array
    of shape (len(t_grid), dim, dim); element 0 is a copy of ``rho0``.  Each
    sample is checked for positivity; a dip below -1e-6 aborts with
    IntegrationError.
    """
    opts = opts or IntegratorOptions()
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) == 0:
        raise ValueError("t_grid must be a nonempty 1-d array")
    if t_grid[0] != 0.0:
        raise ValueError("t_grid must start at 0")
    if len(t_grid) > 1 and np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    rho = np.asarray(rho0, dtype=np.complex128).copy()
    check_density_matrix(rho)

    gen = _Generator(h_total, terms)
    out = np.empty((len(t_grid), gen.dim, gen.dim), dtype=np.complex128)
    out[0] = rho
    h_next = opts.dt
    for i in range(1, len(t_grid)):
        t0, t1 = t_grid[i - 1], t_grid[i]
        if opts.method == "fixed-rk4":
            rho = _rk4_segment(gen, rho, t0, t1, opts.dt)
        else:
            rho, h_next = _rk45_segment(gen, rho, t0, t1, opts, h_next)
        _check_positivity(rho, float(t1))
        out[i] = rho
    return out


def _check_positivity(rho: np.ndarray, t: float) -> None:
    # Cholesky of rho - POSITIVITY_FAIL*I succeeds iff min eig > POSITIVITY_FAIL;
    # much cheaper than a full eigendecomposition on the happy path.
    shifted = rho + (-POSITIVITY_FAIL) * np.eye(rho.shape[0])
    try:
        np.linalg.cholesky(shifted)
    except np.linalg.LinAlgError:
        min_eig = float(np.linalg.eigvalsh(rho)[0])
        if min_eig < POSITIVITY_FAIL:
            raise IntegrationError(
                f"positivity violated (min eig {min_eig:.3e})", t) from None
