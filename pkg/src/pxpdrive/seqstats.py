"""Pair elimination on dipole-symbol sequences and mean reduced lengths.

Opposite neighbours (1,2) or (2,1) are replaced by the identity scanning the
application-ordered sequence left to right; equal neighbours keep the first
symbol and continue from the second.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .protocols import ProtocolKind, fibonacci_level, sequence_symbols, thue_morse_level

BRUTEFORCE_MAX_N = 20


@dataclass(frozen=True)
class ReductionReport:
    input_length: int
    reduced: tuple[int, ...]

    @property
    def reduced_length(self) -> int:
        return len(self.reduced)


def reduce_sequence(seq) -> ReductionReport:
    seq = [int(s) for s in seq]
    if any(s not in (1, 2) for s in seq):
        raise ValueError("symbols must be 1 or 2")
    out = []
    i, n = 0, len(seq)
    while i < n:
        if i == n - 1:
            out.append(seq[i])
            i += 1
        elif seq[i] == seq[i + 1]:
            out.append(seq[i])
            i += 1
        else:
            i += 2
    return ReductionReport(n, tuple(out))


def reduced_lengths_all(N: int) -> np.ndarray:
    """Reduced length of every one of the ``2**N`` sequences (bit ``k`` of the index is symbol ``k``)."""
    codes = np.arange(2**N, dtype=np.int64)
    pos = np.zeros_like(codes)
    length = np.zeros_like(codes)
    for _ in range(N):
        active = pos < N
        if not active.any():
            break
        last = active & (pos == N - 1)
        cur = (codes >> pos) & 1
        nxt = (codes >> np.minimum(pos + 1, N - 1)) & 1
        same = active & ~last & (cur == nxt)
        diff = active & ~last & (cur != nxt)
        length += last | same
        pos += np.where(diff, 2, np.where(last | same, 1, 0))
    return length


def avg_reduced_length_bruteforce(N: int) -> Fraction:
    """Exact mean reduced length over all ``2**N`` sequences."""
    if not 1 <= N <= BRUTEFORCE_MAX_N:
        raise ValueError(f"brute force needs 1 <= N <= {BRUTEFORCE_MAX_N}, got {N}")
    return Fraction(int(reduced_lengths_all(N).sum()), 2**N)


def avg_reduced_length_closed(N: int) -> Fraction:
    """``N/3 + (4/9)(1 - (-1/2)**N)``."""
    if N < 2:
        raise ValueError("closed form is anchored at N >= 2")
    return Fraction(N, 3) + Fraction(4, 9) * (1 - Fraction(-1, 2) ** N)


def fibonacci_number(K: int) -> int:
    """``F_0 = 1, F_1 = 1, F_2 = 2, ...`` so that level ``K`` has length ``F_K``."""
    a, b = 1, 1
    for _ in range(K):
        a, b = b, a + b
    return a


def protocol_reduced_lengths(kind: ProtocolKind | str, K: int | None = None, N: int | None = None,
                             seed: int | None = 0) -> ReductionReport:
    """Reduce a protocol's symbol stream.

    Thue-Morse and Fibonacci take a level ``K``; periodic and random take a
    length ``N``.
    """
    kind = ProtocolKind(kind)
    if kind is ProtocolKind.DIPOLAR_THUE_MORSE:
        seq = thue_morse_level(_need(K, "K"))
    elif kind is ProtocolKind.DIPOLAR_FIBONACCI:
        seq = fibonacci_level(_need(K, "K"))
    elif kind in (ProtocolKind.DIPOLAR_PERIODIC, ProtocolKind.DIPOLAR_RANDOM):
        seq = sequence_symbols(kind, _need(N, "N"), seed)
    else:
        raise ValueError(f"{kind.value} has no symbol sequence")
    return reduce_sequence(seq)


def _need(v, name):
    if v is None:
        raise ValueError(f"{name} is required for this protocol")
    return v
