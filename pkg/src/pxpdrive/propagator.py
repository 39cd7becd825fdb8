"""Exact square-pulse propagators from dense Hermitian eigendecompositions."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .hilbert import FockBasis
from .operators import PulseParams, build_hamiltonian, build_pxp_term, sz_diagonal

UNITARY_ATOL = 1e-10
BRANCH_TOL = 1e-8


class NotHermitianError(ValueError):
    pass


class BranchAmbiguityWarning(RuntimeWarning):
    """An eigenphase of the unitary sits on the branch cut of the logarithm."""


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class Propagator:
    """A unitary plus what produced it (``params`` is None for composite products)."""

    matrix: np.ndarray
    params: PulseParams | None = None
    duration: float | None = None

    def __matmul__(self, other: "Propagator") -> "Propagator":
        return Propagator(self.matrix @ other.matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def diagonalize(H: np.ndarray, rtol: float = 1e-12) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise NotHermitianError(f"expected a square matrix, got shape {H.shape}")
    scale = max(np.max(np.abs(H), initial=0.0), 1.0)
    asym = np.max(np.abs(H - H.conj().T), initial=0.0)
    if asym > rtol * scale:
        raise NotHermitianError(f"matrix is not Hermitian: max|H - H^dagger| = {asym:.3e}")
    E, V = np.linalg.eigh(H)
    return SpectralDecomposition(E, V)


def propagator(decomp: SpectralDecomposition, t: float, params: PulseParams | None = None) -> Propagator:
    """``V diag(exp(-i E t)) V^dagger``; ``t`` may be negative."""
    V = decomp.eigenvectors
    U = (V * np.exp(-1j * decomp.eigenvalues * t)) @ V.conj().T
    return Propagator(U, params, float(t))


def evolve(state: np.ndarray, U: Propagator | np.ndarray) -> np.ndarray:
    M = U.matrix if isinstance(U, Propagator) else U
    if M.shape[1] != state.shape[0]:
        raise ValueError(f"dimension mismatch: propagator {M.shape}, state {state.shape}")
    return M @ state


def unitarity_error(U: Propagator | np.ndarray) -> float:
    M = U.matrix if isinstance(U, Propagator) else U
    return float(np.max(np.abs(M.conj().T @ M - np.eye(M.shape[0]))))


def extract_heff(U: Propagator | np.ndarray, total_time: float) -> np.ndarray:
    """Hermitian generator with ``U = exp(-i H total_time)``, principal branch.

    Eigenphases are taken in (-pi, pi]. A :class:`BranchAmbiguityWarning` is
    issued when any phase lies within ``1e-8`` of ``+-pi``.
    """
    if total_time <= 0:
        raise ValueError("total_time must be positive")
    M = U.matrix if isinstance(U, Propagator) else np.asarray(U)
    # complex Schur form of a normal matrix is diagonal with unitary Z
    Tm, Z = scipy.linalg.schur(M.astype(np.complex128), output="complex")
    phases = np.angle(np.diag(Tm))
    if np.any(np.pi - np.abs(phases) < BRANCH_TOL):
        warnings.warn(
            "eigenphase within 1e-8 of the branch cut; effective Hamiltonian is ambiguous",
            BranchAmbiguityWarning,
            stacklevel=2,
        )
    H = (Z * (-phases / total_time)) @ Z.conj().T
    return 0.5 * (H + H.conj().T)


class PropagatorCache:
    """Memoises pulse eigendecompositions and propagators for one basis.

    Keys are ``(PulseParams, duration)``; a hit returns the very same array.
    Populate before sharing across threads.
    """

    def __init__(self, basis: FockBasis):
        self.basis = basis
        self._pxp = build_pxp_term(basis)
        self._sz = sz_diagonal(basis)
        self._decomps: dict[PulseParams, SpectralDecomposition] = {}
        self._props: dict[tuple[PulseParams, float], Propagator] = {}
        self.hits = 0
        self.misses = 0

    def hamiltonian(self, p: PulseParams) -> np.ndarray:
        return build_hamiltonian(self.basis, p, pxp=self._pxp, sz=self._sz)

    def decomposition(self, p: PulseParams) -> SpectralDecomposition:
        dec = self._decomps.get(p)
        if dec is None:
            dec = diagonalize(self.hamiltonian(p))
            self._decomps[p] = dec
        return dec

    def get(self, p: PulseParams, duration: float) -> Propagator:
        key = (p, float(duration))
        U = self._props.get(key)
        if U is None:
            self.misses += 1
            U = propagator(self.decomposition(p), duration, params=p)
            self._props[key] = U
        else:
            self.hits += 1
        return U

    def __len__(self) -> int:
        return len(self._props)
