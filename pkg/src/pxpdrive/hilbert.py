"""Blockade-constrained Fock space of a PXP chain.

Basis states are L-bit integers; bit ``j`` set means spin up at site ``j``.
Sites ``L-1`` and ``0`` are neighbours only for periodic chains.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

L_MIN = 2
L_MAX = 24


class BasisSizeError(ValueError):
    """Chain length outside the range dense matrices can handle."""


class BoundaryCondition(enum.Enum):
    PERIODIC = "pbc"
    OPEN = "obc"

    @classmethod
    def parse(cls, value: "BoundaryCondition | str") -> "BoundaryCondition":
        if isinstance(value, cls):
            return value
        key = str(value).lower()
        for bc in cls:
            if key in (bc.value, bc.name.lower()):
                return bc
        raise ValueError(f"unknown boundary condition {value!r} (use 'pbc' or 'obc')")


def admissible_mask(masks: np.ndarray, L: int, bc: BoundaryCondition) -> np.ndarray:
    """Boolean array: True where no two adjacent bits are set."""
    masks = np.asarray(masks, dtype=np.int64)
    ok = (masks & (masks >> 1)) == 0
    if bc is BoundaryCondition.PERIODIC and L > 1:
        wrap = ((masks >> (L - 1)) & 1) & (masks & 1)
        ok &= wrap == 0
    return ok


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Sorted admissible bitmasks of a length-``L`` chain."""

    L: int
    bc: BoundaryCondition
    states: np.ndarray
    _index: dict = field(default=None, repr=False)

    def __post_init__(self):
        self.states.setflags(write=False)

    @property
    def dim(self) -> int:
        return int(self.states.size)

    def __len__(self) -> int:
        return self.dim

    @property
    def index_of(self) -> dict:
        """Map from bitmask to position in :attr:`states`."""
        if self._index is None:
            object.__setattr__(self, "_index", {int(s): i for i, s in enumerate(self.states)})
        return self._index

    def lookup(self, masks) -> np.ndarray:
        """Vectorised inverse of ``states[i]``; raises KeyError on inadmissible masks."""
        masks = np.asarray(masks, dtype=np.int64)
        idx = np.searchsorted(self.states, masks)
        idx_clipped = np.minimum(idx, self.dim - 1)
        if not np.all(self.states[idx_clipped] == masks):
            raise KeyError("mask not in basis")
        return idx

    def neighbours(self, j: int) -> tuple[int, ...]:
        """Sites adjacent to ``j`` (deduplicated, so L=2 periodic gives one neighbour)."""
        L = self.L
        if self.bc is BoundaryCondition.PERIODIC:
            return tuple(sorted({(j - 1) % L, (j + 1) % L} - {j}))
        return tuple(k for k in (j - 1, j + 1) if 0 <= k < L)

    def popcount(self) -> np.ndarray:
        """Number of up spins of every basis state."""
        return _popcount(self.states)

    def as_strings(self) -> list[str]:
        """Basis states as binary strings (site ``L-1`` leftmost, site 0 rightmost)."""
        return [format(int(s), f"0{self.L}b") for s in self.states]


def _popcount(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.int64)
    count = np.zeros_like(x)
    while np.any(x):
        count += x & 1
        x = x >> 1
    return count


def enumerate_basis(L: int, bc: BoundaryCondition | str = BoundaryCondition.PERIODIC) -> FockBasis:
    """Enumerate the blockade-constrained basis.

    Parameters
    ----------
    L : int
        Number of sites, ``2 <= L <= 24``.
    bc : BoundaryCondition or str
        ``"pbc"`` (default) or ``"obc"``.
    """
    bc = BoundaryCondition.parse(bc)
    if not isinstance(L, (int, np.integer)) or not (L_MIN <= L <= L_MAX):
        raise BasisSizeError(f"L must be an integer in [{L_MIN}, {L_MAX}], got {L!r}")
    L = int(L)
    states = _build_states(L, bc)
    return FockBasis(L=L, bc=bc, states=states)


def _build_states(L: int, bc: BoundaryCondition) -> np.ndarray:
    # Grow admissible open-chain strings site by site; avoids a 2**L sweep at L=24.
    states = np.array([0, 1], dtype=np.int64)
    for j in range(1, L):
        prev_up = (states >> (j - 1)) & 1
        with_up = states[prev_up == 0] | (1 << j)
        states = np.concatenate([states, with_up])
    if bc is BoundaryCondition.PERIODIC:
        states = states[admissible_mask(states, L, bc)]
    return np.sort(states)


def all_down_state(basis: FockBasis) -> np.ndarray:
    """Unit vector on the all-down configuration (bitmask 0)."""
    psi = np.zeros(basis.dim, dtype=np.complex128)
    psi[basis.index_of[0]] = 1.0
    return psi


def lucas(n: int) -> int:
    a, b = 2, 1
    for _ in range(n):
        a, b = b, a + b
    return a
