"""Perturbative effective Hamiltonians and first-order vanishing conditions.

Sign conventions: the field term of a pulse is ``-b lam Sz`` so the zeroth
order propagator of a pulse sequence is ``exp(+i lam Sz tau(t))`` with
``tau(t)`` the signed elapsed time ``int_0^t b(s) ds``. In the interaction
picture ``s~^+`` then picks up ``g(tau) = exp(-2 i lam tau)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .hilbert import FockBasis
from .operators import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, build_C_operator, build_Hr, sz_diagonal
from .propagator import Propagator, diagonalize, extract_heff, propagator
from .protocols import PULSE_SCHEDULES, ProtocolKind


# --- U3 block: first and second order --------------------------------------


def first_order_integral_block(lam: float, dT: float, eta1: float, eta2: float) -> complex:
    """``int_0^dT exp(-2 i (eta1 - eta2) lam t) dt``."""
    k = 2.0 * (eta1 - eta2) * lam
    if k == 0:
        return complex(dT)
    return (1 - np.exp(-1j * k * dT)) / (1j * k)


def heff2_coefficient(w: float, lam: float, etas) -> float:
    """Prefactor of the C operator in the second-order generator of one U3 block.

    The generator is defined through ``U3 = exp(-i H dT)``.
    """
    e1, e2, e3, e4 = etas
    return (e1 - e2 + e3 - e4) * w**2 / (2 * lam)


def heff2_block(w: float, lam: float, etas, basis: FockBasis, C: np.ndarray | None = None) -> np.ndarray:
    if C is None:
        C = build_C_operator(basis)
    return heff2_coefficient(w, lam, etas) * C


# --- U4 / U5 first order in delta_w ----------------------------------------


def field_signs(kind: ProtocolKind) -> tuple[int, ...]:
    return tuple(b for _, b in PULSE_SCHEDULES[ProtocolKind(kind)])


def segment_bounds(T: float, dT: float, etas) -> np.ndarray:
    """Cumulative pulse end times ``0, T1, T2, T3, T4``."""
    return np.concatenate([[0.0], np.cumsum(T / 4 + np.asarray(etas, dtype=float) * dT)])


def retarded_time(kind: ProtocolKind, t, T: float, dT: float, etas):
    """Signed elapsed time ``int_0^t b(s) ds`` of the field term."""
    bounds = segment_bounds(T, dT, etas)
    signs = np.array(field_signs(kind), dtype=float)
    knots = np.concatenate([[0.0], np.cumsum(signs * np.diff(bounds))])
    return np.interp(t, bounds, knots)


def u4_u5_zeroth_order(basis: FockBasis, kind: ProtocolKind, lam: float, t: float, T: float, dT: float,
                       etas) -> Propagator:
    """Field-only propagator ``exp(+i lam Sz tau(t))`` at time ``t`` inside one cycle."""
    bounds = segment_bounds(T, dT, etas)
    if not (0 <= t <= bounds[-1] + 1e-15):
        raise ValueError(f"t={t} outside the cycle [0, {bounds[-1]}]")
    tau = float(retarded_time(kind, t, T, dT, etas))
    phases = np.exp(1j * lam * sz_diagonal(basis) * tau)
    return Propagator(np.diag(phases), None, float(t))


def first_order_integral(kind: ProtocolKind, lam: float, T: float, dT: float, etas) -> complex:
    """``int_0^{T4} exp(-2 i lam tau(t)) dt`` summed segment by segment.

    Multiplies ``s~^+`` in the first-order (``delta_w``) correction to one U4
    or U5 cycle. Valid for any ``etas`` and ``dT``.
    """
    bounds = segment_bounds(T, dT, etas)
    signs = field_signs(kind)
    tau = retarded_time(kind, bounds, T, dT, etas)
    total = 0j
    for k, s in enumerate(signs):
        total += s * (np.exp(-2j * lam * tau[k]) - np.exp(-2j * lam * tau[k + 1])) / (2j * lam)
    return complex(total)


def first_order_A(lam: float, T: float) -> complex:
    """U4 first-order coefficient at ``lam dT = p pi/2`` with binary etas.

    Equals ``(2/lam) exp(-i lam T/2) sin(lam T/2)``; zero when
    ``lam T/2`` is a multiple of pi.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    return complex((1 - np.exp(-1j * lam * T)) / (1j * lam))


def first_order_B(lam: float, T: float) -> complex:
    """U5 first-order coefficient at ``lam dT = pi/2`` (odd p) with binary etas."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    return complex(-4j / lam * np.exp(-1j * lam * T / 4) * np.cos(lam * T / 4))


def first_order_B_envelope(lam: float, T: float) -> float:
    """``cos(lam T / 4)``, the factor of the U5 coefficient that can vanish."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    return float(np.cos(lam * T / 4))


@dataclass(frozen=True)
class SpecialPeriodFamily:
    protocol: ProtocolKind
    p: int
    T_star: float


def special_periods(protocol: ProtocolKind | str, lam: float, p_max: int) -> list[SpecialPeriodFamily]:
    """Periods where the first-order ``delta_w`` term of a cycle vanishes.

    U4: ``lam T/2 = p pi`` for ``p = 1 .. p_max``.
    U5: ``lam T/4 = (p + 1/2) pi`` for ``p = 0 .. p_max``.
    """
    protocol = ProtocolKind(protocol)
    if p_max < 1:
        raise ValueError("p_max >= 1")
    if protocol is ProtocolKind.U4:
        return [SpecialPeriodFamily(protocol, p, 2 * np.pi * p / lam) for p in range(1, p_max + 1)]
    if protocol is ProtocolKind.U5:
        return [SpecialPeriodFamily(protocol, p, 4 * np.pi / lam * (p + 0.5)) for p in range(0, p_max + 1)]
    raise ValueError("special periods are defined for u4 and u5")


# --- two-level algebra -------------------------------------------------------


@dataclass(frozen=True)
class PauliCoeffs:
    identity: float
    z: float
    x: float
    y: float

    def matrix(self) -> np.ndarray:
        return self.identity * PAULI_I + self.z * PAULI_Z + self.x * PAULI_X + self.y * PAULI_Y

    @property
    def off_diagonal(self) -> float:
        return float(np.hypot(self.x, self.y))

    def __truediv__(self, s: float) -> "PauliCoeffs":
        return PauliCoeffs(self.identity / s, self.z / s, self.x / s, self.y / s)


def pauli_decompose(H: np.ndarray, atol: float = 1e-12) -> PauliCoeffs:
    H = np.asarray(H)
    if H.shape != (2, 2) or np.max(np.abs(H - H.conj().T)) > atol:
        raise ValueError("expected a 2x2 Hermitian matrix")
    half_trace = lambda P: float(np.real(np.trace(H @ P)) / 2)  # noqa: E731
    return PauliCoeffs(half_trace(PAULI_I), half_trace(PAULI_Z), half_trace(PAULI_X), half_trace(PAULI_Y))


# --- L = 3 reduced model -----------------------------------------------------


class L3Sequence(enum.Enum):
    TM_PAIR = "tm-pair"  # U_r1 U_r2
    PERIODIC_PAIR = "periodic-pair"  # U_r1 U_r1
    SINGLE = "single"  # U_r1


def _l3_pulses(which: L3Sequence) -> list[tuple[int, int]]:
    """Application-ordered (a, b) of the T/4 pulses making up the sequence."""
    half = {1: [(1, 1), (1, -1)], -1: [(-1, 1), (-1, -1)]}
    u1 = half[-1] + half[1]  # U_r1 = U_r+ U_r-: U_r- acts first
    u2 = half[1] + half[-1]
    which = L3Sequence(which)
    if which is L3Sequence.SINGLE:
        return u1
    if which is L3Sequence.PERIODIC_PAIR:
        return u1 + u1
    return u2 + u1  # U_r1 U_r2: U_r2 acts first


def l3_unitary(which: L3Sequence, w: float, lam: float, delta_lambda: float, T: float) -> np.ndarray:
    U = np.eye(2, dtype=np.complex128)
    for a, b in _l3_pulses(which):
        step = propagator(diagonalize(build_Hr(a, b, w, lam, delta_lambda)), T / 4).matrix
        U = step @ U
    return U


def l3_duration(which: L3Sequence, T: float) -> float:
    return T if L3Sequence(which) is L3Sequence.SINGLE else 2 * T


def l3_generator(which: L3Sequence, w: float, lam: float, delta_lambda: float, T: float) -> PauliCoeffs:
    """Pauli coefficients of the generator extracted from the exact 2x2 unitary."""
    U = l3_unitary(which, w, lam, delta_lambda, T)
    return pauli_decompose(extract_heff(U, l3_duration(which, T)), atol=1e-10)


def _rotation(n: np.ndarray, angle: float) -> np.ndarray:
    """Rotation matrix about unit vector ``n``."""
    K = np.array([[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * (K @ K)


def l3_first_order(which: L3Sequence, w: float, lam: float, T: float) -> PauliCoeffs:
    """Generator per unit ``delta_lambda`` to first order, in closed form.

    Each pulse rotates Bloch vectors about ``n = (sqrt3 a w, 0, b lam)/Omega`` at
    rate ``2 Omega``; the first-order generator is the time average of the
    perturbation ``2 + tau^z`` in the interaction picture, integrated analytically
    pulse by pulse.
    """
    omega = np.hypot(np.sqrt(3) * w, lam)
    tq = T / 4
    zhat = np.array([0.0, 0.0, 1.0])
    acc = np.zeros(3)
    frame = np.eye(3)  # R_1 R_2 ... R_{k-1}
    for a, b in _l3_pulses(which):
        n = np.array([np.sqrt(3) * a * w, 0.0, b * lam]) / omega
        par = n @ zhat
        perp = zhat - par * n
        cross = np.cross(n, zhat)
        two = 2 * omega
        integral = tq * par * n + np.sin(two * tq) / two * perp - (1 - np.cos(two * tq)) / two * cross
        acc += frame @ integral
        frame = frame @ _rotation(n, -two * tq)
    total = l3_duration(which, T)
    x, y, z = acc / total
    return PauliCoeffs(2.0, float(z), float(x), float(y))


def quoted_dipole_coefficients(w: float, lam: float, T: float, delta_lambda: float) -> tuple[float, float]:
    """Leading-order ``(A1, A2)`` of the single-dipole generator in its quoted closed form.

    ``x0 = T sqrt(lam^2 + 3 w^2)``. Kept for the root of ``A2`` at ``x0 = 4 p pi``;
    the magnitudes do not agree with exact extraction, use :func:`l3_first_order`.
    """
    x0 = T * np.sqrt(lam**2 + 3 * w**2)
    lT, wT = lam * T, w * T
    common = lT**2 * x0**4 + 6 * wT**2 * x0 * np.sin(x0 / 2)
    A1 = delta_lambda / x0**6 * (lT**2 + 3 * wT**2 * np.cos(x0 / 2)) * common
    A2 = (2 * np.sqrt(3) * wT * delta_lambda / x0**6 * np.sin(x0 / 4) * common
          * (x0 * np.cos(x0 / 4) + lT * np.sin(x0 / 4)))
    return float(A1), float(A2)


def fit_power(x, y) -> tuple[float, float]:
    """Least-squares slope and intercept of ``log|y|`` against ``log x``."""
    slope, icpt = np.polyfit(np.log(np.asarray(x, float)), np.log(np.abs(np.asarray(y, float))), 1)
    return float(slope), float(icpt)


def bisect_root(f, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200) -> float:
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise ValueError("root not bracketed")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0 or hi - lo < tol:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)
