"""Per-cycle observables and the scalar metrics derived from trajectories."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hilbert import FockBasis
from .operators import sz_diagonal


class ShortTrajectoryError(ValueError):
    pass


def magnetization(basis: FockBasis, state: np.ndarray, sz: np.ndarray | None = None) -> float:
    """``<psi| sum_j sigma^z_j |psi> / L``."""
    if sz is None:
        sz = sz_diagonal(basis)
    return float(np.dot(np.abs(state) ** 2, sz) / basis.L)


def fidelity(state: np.ndarray, initial: np.ndarray) -> float:
    """Squared overlap ``|<initial|state>|^2``."""
    return float(abs(np.vdot(initial, state)) ** 2)


@dataclass
class Trajectory:
    """Observables at cycle boundaries ``m = 0 .. m_max`` (row 0 is the initial state)."""

    m: np.ndarray
    M: np.ndarray
    F: np.ndarray
    params: dict = field(default_factory=dict)
    seed: int | None = None
    snapshots: dict = field(default_factory=dict)

    @property
    def m_max(self) -> int:
        return int(self.m[-1])

    def __len__(self) -> int:
        return self.m.size


def avg_magnetization(traj: Trajectory, center: int = 1000, half_width: int = 50) -> float:
    """Mean of ``M(m)`` over the inclusive window ``center +- half_width``.

    Divides by the number of samples (101 for the default window).
    """
    lo, hi = center - half_width, center + half_width
    if traj.m_max < hi:
        raise ShortTrajectoryError(f"need at least {hi} cycles, trajectory has {traj.m_max}")
    sel = (traj.m >= lo) & (traj.m <= hi)
    return float(np.mean(traj.M[sel]))


def avg_fidelity(traj: Trajectory, n_cycles: int = 2500) -> float:
    """Mean of ``F(m)`` over ``m = 1 .. n_cycles``."""
    if traj.m_max < n_cycles:
        raise ShortTrajectoryError(f"need at least {n_cycles} cycles, trajectory has {traj.m_max}")
    sel = (traj.m >= 1) & (traj.m <= n_cycles)
    return float(np.mean(traj.F[sel]))


def thermalization_time(traj: Trajectory, eps: float) -> tuple[int, bool]:
    """First cycle ``m0 >= 1`` with ``|M(m0)/M(0) - 1| >= eps``.

    Returns ``(m0, censored)``; when the threshold is never crossed the result
    is ``(m_max, True)``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    dev = np.abs(traj.M[1:] / traj.M[0] - 1.0)
    hit = np.nonzero(dev >= eps)[0]
    if hit.size == 0:
        return traj.m_max, True
    return int(traj.m[1:][hit[0]]), False
