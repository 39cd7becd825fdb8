"""Two-rate drive protocols: random-period cycles and dipolar sequences.

Every operator product is stored and applied in application order: index 0
acts first on the state.
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import asdict, dataclass
from typing import Callable, Iterable

import numpy as np

from .hilbert import FockBasis, all_down_state
from .observables import Trajectory, fidelity
from .operators import PulseParams, sz_diagonal
from .propagator import Propagator, PropagatorCache

log = logging.getLogger(__name__)

NORM_DRIFT_TOL = 1e-8


class EtaMode(enum.Enum):
    BINARY = "binary"
    UNIFORM = "uniform"


class ProtocolKind(enum.Enum):
    U3 = "u3"
    U4 = "u4"
    U5 = "u5"
    DIPOLAR_PERIODIC = "dp-periodic"
    DIPOLAR_RANDOM = "dp-random"
    DIPOLAR_FIBONACCI = "dp-fib"
    DIPOLAR_THUE_MORSE = "dp-tm"

    @property
    def is_dipolar(self) -> bool:
        return self.value.startswith("dp-")

    @property
    def default_eps(self) -> float:
        """Thermalization threshold used for this protocol family."""
        return 0.05 if self.is_dipolar else 0.1


# (a, b) sign pairs per pulse, application order
PULSE_SCHEDULES = {
    ProtocolKind.U3: ((-1, -1), (1, 1), (1, -1), (-1, 1)),
    ProtocolKind.U4: ((1, 1), (-1, 1), (1, -1), (-1, -1)),
    ProtocolKind.U5: ((1, 1), (1, -1), (-1, 1), (-1, -1)),
}


class PreconditionError(ValueError):
    pass


class NormDriftError(RuntimeError):
    pass


@dataclass(frozen=True)
class DriveParams:
    """Physical drive parameters (hbar = 1).

    Pulse ``i`` of a random-period cycle lasts ``T/4 + eta_i dT``; the dipolar
    protocols ignore ``dT``.
    """

    w: float = 1.0
    lam: float = 1.0
    delta_w: float = 0.0
    delta_lambda: float = 0.0
    T: float = 1.0
    dT: float = 0.0
    eta_mode: EtaMode = EtaMode.BINARY
    seed: int = 0

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.dT < 0:
            raise ValueError(f"dT must be non-negative, got {self.dT}")
        # dT = T/4 is allowed: it is the only way to reach the lambda T/(4 pi) = 1/2 rows
        # at lambda dT = pi/2. Pulse durations stay non-negative.
        if self.dT > self.T / 4 * (1 + 1e-12):
            raise ValueError(f"dT must not exceed T/4 (dT={self.dT}, T/4={self.T / 4})")
        if self.dT > self.T / 8:
            warnings.warn(f"dT={self.dT} exceeds T/8; pulses are far from T/4", stacklevel=3)
        object.__setattr__(self, "eta_mode", EtaMode(self.eta_mode))

    def pulse(self, a: int, b: int, static: bool = True) -> PulseParams:
        if static:
            return PulseParams(a, b, self.w, self.lam, self.delta_w, self.delta_lambda)
        return PulseParams(a, b, self.w, self.lam)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["eta_mode"] = self.eta_mode.value
        return d


def draw_etas(rng: np.random.Generator, n: int, mode: EtaMode = EtaMode.BINARY) -> np.ndarray:
    """``n`` i.i.d. duration offsets: +-1 (binary) or uniform on [-1, 1]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    mode = EtaMode(mode)
    if mode is EtaMode.BINARY:
        return 2.0 * rng.integers(0, 2, size=n) - 1.0
    return rng.uniform(-1.0, 1.0, size=n)


# --- random-period cycles ----------------------------------------------------


def _check_kind_params(kind: ProtocolKind, params: DriveParams) -> None:
    if kind is ProtocolKind.U3 and (params.delta_w != 0 or params.delta_lambda != 0):
        raise PreconditionError("U3 is defined at delta_w = delta_lambda = 0")


def cycle_pulses(kind: ProtocolKind, params: DriveParams, etas) -> list[tuple[PulseParams, float]]:
    """The four ``(PulseParams, duration)`` pulses of one cycle, application order."""
    _check_kind_params(kind, params)
    sched = PULSE_SCHEDULES[kind]
    if len(etas) != 4:
        raise ValueError("a random-period cycle needs four etas")
    return [
        (params.pulse(a, b), params.T / 4 + float(eta) * params.dT)
        for (a, b), eta in zip(sched, etas)
    ]


def cycle_unitary(kind: ProtocolKind, params: DriveParams, etas, cache: PropagatorCache) -> Propagator:
    U = None
    for p, t in cycle_pulses(kind, params, etas):
        step = cache.get(p, t)
        U = step if U is None else step @ U
    return U


def cycle_unitary_u3(params: DriveParams, etas, cache: PropagatorCache) -> Propagator:
    return cycle_unitary(ProtocolKind.U3, params, etas, cache)


def cycle_unitary_u4(params: DriveParams, etas, cache: PropagatorCache) -> Propagator:
    return cycle_unitary(ProtocolKind.U4, params, etas, cache)


def cycle_unitary_u5(params: DriveParams, etas, cache: PropagatorCache) -> Propagator:
    return cycle_unitary(ProtocolKind.U5, params, etas, cache)


# --- dipolar -----------------------------------------------------------------


def dipole_halves(params: DriveParams, cache: PropagatorCache) -> tuple[Propagator, Propagator]:
    """``(U_+, U_-)``, each a (sign, b=+1) pulse followed by a (sign, b=-1) pulse of T/4."""
    q = params.T / 4
    halves = []
    for s in (1, -1):
        first = cache.get(params.pulse(s, 1), q)
        second = cache.get(params.pulse(s, -1), q)
        halves.append(second @ first)
    return halves[0], halves[1]


def dipole_unitaries(params: DriveParams, cache: PropagatorCache) -> tuple[Propagator, Propagator]:
    """``U1 = U_+ U_-`` and ``U2 = U_- U_+`` (rightmost factor first)."""
    up, um = dipole_halves(params, cache)
    return up @ um, um @ up


def thue_morse(m: int) -> np.ndarray:
    """Symbols ``1 + parity(popcount(n))`` for ``n = 0 .. m-1``."""
    n = np.arange(m, dtype=np.int64)
    parity = np.zeros(m, dtype=np.int64)
    while np.any(n):
        parity ^= n & 1
        n >>= 1
    return (1 + parity).astype(np.int8)


def fibonacci_level(K: int) -> list[int]:
    """Level-``K`` Fibonacci word: ``[1]``, ``[1, 2]``, then ``w_K = w_{K-1} + w_{K-2}``."""
    if K < 1:
        raise ValueError("K >= 1")
    prev, cur = [1], [1, 2]
    if K == 1:
        return prev
    for _ in range(K - 2):
        prev, cur = cur, cur + prev
    return cur


def fibonacci_word(m: int) -> np.ndarray:
    K = 2
    word = fibonacci_level(K)
    while len(word) < m:
        K += 1
        word = fibonacci_level(K)
    return np.asarray(word[:m], dtype=np.int8)


def thue_morse_level(K: int) -> np.ndarray:
    """Level ``K`` of the Thue-Morse construction, length ``2**(K-1)``."""
    return thue_morse(2 ** (K - 1))


def sequence_symbols(kind: ProtocolKind, m: int, rng: np.random.Generator | int | None = None) -> np.ndarray:
    """Application-ordered dipole symbols in {1, 2}."""
    if m < 1:
        raise ValueError("m >= 1")
    kind = ProtocolKind(kind)
    if kind is ProtocolKind.DIPOLAR_PERIODIC:
        return np.ones(m, dtype=np.int8)
    if kind is ProtocolKind.DIPOLAR_RANDOM:
        rng = np.random.default_rng(rng)
        return (1 + rng.integers(0, 2, size=m)).astype(np.int8)
    if kind is ProtocolKind.DIPOLAR_THUE_MORSE:
        return thue_morse(m)
    if kind is ProtocolKind.DIPOLAR_FIBONACCI:
        return fibonacci_word(m)
    raise ValueError(f"{kind} is not a dipolar protocol")


@dataclass
class DriveProgram:
    """Resolved drive for ``cycles`` steps.

    Random-period kinds carry an ``(cycles, 4)`` array of etas; dipolar kinds
    carry one symbol per cycle.
    """

    kind: ProtocolKind
    params: DriveParams
    cycles: int
    etas: np.ndarray | None = None
    symbols: np.ndarray | None = None

    @property
    def pulses(self) -> list[tuple[PulseParams, float]]:
        """Flat application-ordered pulse list (random-period kinds only)."""
        if self.etas is None:
            raise AttributeError("dipolar programs are described by symbols")
        out = []
        for row in self.etas:
            out.extend(cycle_pulses(self.kind, self.params, row))
        return out

    def cycle_duration(self, m: int) -> float:
        if self.etas is None:
            return self.params.T
        return self.params.T + float(np.sum(self.etas[m])) * self.params.dT


def build_program(kind: ProtocolKind, params: DriveParams, cycles: int, seed: int | None = None) -> DriveProgram:
    kind = ProtocolKind(kind)
    rng = np.random.default_rng(params.seed if seed is None else seed)
    if kind.is_dipolar:
        return DriveProgram(kind, params, cycles, symbols=sequence_symbols(kind, cycles, rng))
    _check_kind_params(kind, params)
    etas = draw_etas(rng, 4 * cycles, params.eta_mode).reshape(cycles, 4)
    return DriveProgram(kind, params, cycles, etas=etas)


Observer = Callable[[int, np.ndarray], None]


def run_protocol(
    basis: FockBasis,
    params: DriveParams,
    kind: ProtocolKind | str,
    m_max: int,
    observers: Iterable[Observer] = (),
    cache: PropagatorCache | None = None,
    program: DriveProgram | None = None,
    snapshot_every: int | None = None,
) -> Trajectory:
    """Evolve the all-down state for ``m_max`` cycles, recording ``M`` and ``F``.

    A cycle is one four-pulse unitary for the random-period kinds and one dipole
    symbol (duration ``T``) for the dipolar kinds. ``observers`` are called as
    ``obs(m, state)`` at every cycle boundary including ``m = 0``.
    """
    kind = ProtocolKind(kind)
    if cache is None:
        cache = PropagatorCache(basis)
    if program is None:
        program = build_program(kind, params, m_max)
    observers = list(observers)

    sz = sz_diagonal(basis) / basis.L
    psi0 = all_down_state(basis)
    psi = psi0.copy()
    M = np.empty(m_max + 1)
    F = np.empty(m_max + 1)
    snapshots = {}

    def record(m):
        prob = np.abs(psi) ** 2
        norm = prob.sum()
        if abs(norm - 1.0) > NORM_DRIFT_TOL:
            raise NormDriftError(f"norm drifted to {norm!r} at cycle {m} ({kind.value}, {params})")
        M[m] = prob @ sz
        F[m] = fidelity(psi, psi0)
        if snapshot_every and m % snapshot_every == 0:
            snapshots[m] = psi.copy()
        for obs in observers:
            obs(m, psi)

    record(0)
    step = _stepper(kind, params, program, cache)
    for m in range(1, m_max + 1):
        psi = step(m - 1, psi)
        record(m)

    return Trajectory(
        m=np.arange(m_max + 1),
        M=M,
        F=F,
        params={"kind": kind.value, "L": basis.L, "bc": basis.bc.value, **params.as_dict()},
        seed=params.seed,
        snapshots=snapshots,
    )


def _stepper(kind, params, program, cache):
    if kind.is_dipolar:
        U1, U2 = dipole_unitaries(params, cache)
        mats = {1: U1.matrix, 2: U2.matrix}
        symbols = program.symbols
        return lambda i, psi: mats[int(symbols[i])] @ psi

    etas = program.etas
    if params.eta_mode is EtaMode.BINARY:
        # at most 16 distinct cycle unitaries
        cycles: dict[tuple, np.ndarray] = {}

        def step(i, psi):
            key = tuple(etas[i])
            U = cycles.get(key)
            if U is None:
                U = cycle_unitary(kind, params, key, cache).matrix
                cycles[key] = U
            return U @ psi

        return step

    # continuous etas: every duration differs, apply pulses in the eigenbasis
    pulses = [(cache.decomposition(p), p) for p, _ in cycle_pulses(kind, params, etas[0])]

    def step(i, psi):
        for (dec, _), eta in zip(pulses, etas[i]):
            t = params.T / 4 + eta * params.dT
            V = dec.eigenvectors
            psi = V @ (np.exp(-1j * dec.eigenvalues * t) * (V.conj().T @ psi))
        return psi

    return step
