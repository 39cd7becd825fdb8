"""Hamiltonians and observables of the PXP chain in the constrained basis.

All matrices are dense numpy arrays. Real symmetric operators are returned
as float64; :func:`build_hamiltonian` and the L=3 reduced model return
complex128 because they feed straight into the propagator machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import BoundaryCondition, FockBasis

HERMITIAN_ATOL = 1e-12

PAULI_I = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


@dataclass(frozen=True)
class PulseParams:
    """Couplings of one square pulse, ``H = w_eff PXP - lam_eff Sz``.

    ``a`` and ``b`` are the signs of the driven parts of the transverse and
    longitudinal couplings; ``delta_w`` and ``delta_lambda`` are static offsets.
    """

    a: int
    b: int
    w: float
    lam: float
    delta_w: float = 0.0
    delta_lambda: float = 0.0

    def __post_init__(self):
        if self.a not in (1, -1) or self.b not in (1, -1):
            raise ValueError(f"pulse signs must be +1 or -1, got a={self.a}, b={self.b}")

    @property
    def w_eff(self) -> float:
        return self.a * self.w + self.delta_w

    @property
    def lam_eff(self) -> float:
        return self.b * self.lam + self.delta_lambda


def is_hermitian(H: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    H = np.asarray(H)
    return H.ndim == 2 and H.shape[0] == H.shape[1] and np.max(np.abs(H - H.conj().T), initial=0.0) <= atol


def _free_neighbours_mask(basis: FockBasis, j: int) -> np.ndarray:
    states = basis.states
    ok = np.ones(basis.dim, dtype=bool)
    for k in basis.neighbours(j):
        ok &= ((states >> k) & 1) == 0
    return ok


def build_pxp_raising(basis: FockBasis) -> np.ndarray:
    """Matrix of ``sum_j P_{j-1} sigma^+_j P_{j+1}`` (raises one spin)."""
    d = basis.dim
    out = np.zeros((d, d))
    states = basis.states
    for j in range(basis.L):
        down = ((states >> j) & 1) == 0
        src = np.nonzero(down & _free_neighbours_mask(basis, j))[0]
        dst = basis.lookup(states[src] | (1 << j))
        out[dst, src] = 1.0
    return out


def build_pxp_term(basis: FockBasis) -> np.ndarray:
    """Matrix of ``sum_j P_{j-1} sigma^x_j P_{j+1}``."""
    up = build_pxp_raising(basis)
    return up + up.T


def sz_diagonal(basis: FockBasis) -> np.ndarray:
    """Eigenvalues ``2*popcount - L`` of the total ``sigma^z``, per basis state."""
    return (2 * basis.popcount() - basis.L).astype(np.float64)


def build_sz_total(basis: FockBasis) -> np.ndarray:
    return np.diag(sz_diagonal(basis))


def build_hamiltonian(basis: FockBasis, p: PulseParams, pxp=None, sz=None) -> np.ndarray:
    """``(a w + dw) PXP - (b lam + dlam) Sz`` as a complex matrix.

    ``pxp`` and ``sz`` may be passed in to skip rebuilding them.
    """
    if pxp is None:
        pxp = build_pxp_term(basis)
    if sz is None:
        sz = sz_diagonal(basis)
    H = p.w_eff * pxp.astype(np.complex128)
    H[np.diag_indices_from(H)] -= p.lam_eff * sz
    return H


def build_C_operator(basis: FockBasis) -> np.ndarray:
    r"""Second-order operator ``sum_j [P sigma^z_j P + P_{j-1}(s^+_j s^-_{j+1} + h.c.)P_{j+2}]``.

    Built directly from the constrained basis; equals the commutator
    ``[sum_j s~^+_j, sum_j s~^-_j]`` of the raising and lowering parts of the
    PXP term.
    """
    L = basis.L
    d = basis.dim
    states = basis.states
    C = np.zeros((d, d))
    diag = np.zeros(d)
    for j in range(L):
        free = _free_neighbours_mask(basis, j)
        spin = np.where((states >> j) & 1, 1.0, -1.0)
        diag += np.where(free, spin, 0.0)
    C[np.diag_indices(d)] = diag

    periodic = basis.bc is BoundaryCondition.PERIODIC
    bonds = range(L) if periodic and L > 2 else range(L - 1)
    for j in bonds:
        k = (j + 1) % L
        ok = np.ones(d, dtype=bool)
        # outer projectors P_{j-1}, P_{j+2}; skipped where the chain ends
        for site in (j - 1, j + 2):
            if periodic:
                site %= L
            elif not 0 <= site < L:
                continue
            if site in (j, k):
                continue
            ok &= ((states >> site) & 1) == 0
        bj = (states >> j) & 1
        bk = (states >> k) & 1
        movable = ok & (bj != bk)
        src = np.nonzero(movable)[0]
        dst = basis.lookup(states[src] ^ ((1 << j) | (1 << k)))
        C[dst, src] += 1.0
    return C


# --- L = 3 periodic chain, zero-momentum sector -----------------------------


def l3_k0_isometry(basis: FockBasis) -> np.ndarray:
    """Rows are the K=0 states (all-down, symmetric single-up) of an L=3 periodic chain.

    Row 0 is the all-down state, so ``P H P^dagger`` reproduces :func:`build_Hr`
    with ``tau^z = +1`` on the vacuum.
    """
    if basis.L != 3 or basis.bc is not BoundaryCondition.PERIODIC:
        raise ValueError("the reduced two-level model needs L=3 with periodic boundaries")
    P = np.zeros((2, basis.dim), dtype=np.complex128)
    P[0, basis.index_of[0]] = 1.0
    for j in range(3):
        P[1, basis.index_of[1 << j]] = 1 / np.sqrt(3)
    return P


def build_Hr(a: int, b: int, w: float, lam: float, delta_lambda: float = 0.0) -> np.ndarray:
    """Two-level Hamiltonian ``sqrt(3) a w tau^x + (2 + tau^z)(b lam + dlam)``."""
    return np.sqrt(3) * a * w * PAULI_X + (2 * PAULI_I + PAULI_Z) * (lam * b + delta_lambda)
