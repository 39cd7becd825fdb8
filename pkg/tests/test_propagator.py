import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import expm_h
from pxpdrive.hilbert import enumerate_basis
from pxpdrive.operators import PulseParams, build_hamiltonian
from pxpdrive.propagator import (
    BranchAmbiguityWarning,
    NotHermitianError,
    PropagatorCache,
    diagonalize,
    evolve,
    extract_heff,
    propagator,
    unitarity_error,
)

BASIS = enumerate_basis(8)


@given(st.floats(-5, 5), st.floats(0.1, 3), st.floats(0.5, 15), st.sampled_from([1, -1]))
def test_propagator_matches_expm(t, w, lam, a):
    H = build_hamiltonian(BASIS, PulseParams(a, 1, w, lam))
    U = propagator(diagonalize(H), t)
    np.testing.assert_allclose(U.matrix, expm_h(H, t), atol=1e-10)
    assert unitarity_error(U) < 1e-12


def test_group_property_and_inverse():
    H = build_hamiltonian(BASIS, PulseParams(1, -1, 0.9, 4.0, 0.1, 0.02))
    d = diagonalize(H)
    U = propagator(d, 0.7)
    np.testing.assert_allclose((propagator(d, 0.3) @ propagator(d, 0.4)).matrix, U.matrix, atol=1e-12)
    np.testing.assert_allclose((propagator(d, -0.7) @ U).matrix, np.eye(BASIS.dim), atol=1e-12)


def test_zero_time_is_identity():
    d = diagonalize(build_hamiltonian(BASIS, PulseParams(1, 1, 1, 1)))
    np.testing.assert_allclose(propagator(d, 0.0).matrix, np.eye(BASIS.dim), atol=1e-14)


def test_non_hermitian_rejected():
    H = np.array([[0, 1], [0, 0]], dtype=complex)
    with pytest.raises(NotHermitianError):
        diagonalize(H)
    with pytest.raises(NotHermitianError):
        diagonalize(np.zeros((2, 3)))


def test_evolve_dimension_check():
    d = diagonalize(np.eye(3))
    with pytest.raises(ValueError):
        evolve(np.ones(4), propagator(d, 1.0))


@given(st.integers(0, 2**32 - 1), st.floats(0.3, 2.0))
def test_extract_heff_recovers_small_generator(seed, t):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    H = (A + A.conj().T) / 2
    H *= 0.9 * np.pi / (np.max(np.abs(np.linalg.eigvalsh(H))) * t)  # phases stay inside (-pi, pi)
    np.testing.assert_allclose(extract_heff(expm_h(H, t), t), H, atol=1e-9)


def test_extract_heff_output_is_hermitian_and_reproduces_unitary():
    H = build_hamiltonian(BASIS, PulseParams(1, 1, 2.0, 7.0))
    U = propagator(diagonalize(H), 1.3).matrix
    He = extract_heff(U, 1.3)
    np.testing.assert_allclose(He, He.conj().T, atol=1e-14)
    np.testing.assert_allclose(expm_h(He, 1.3), U, atol=1e-10)


def test_branch_warning():
    U = np.diag([np.exp(1j * np.pi), 1.0])
    with pytest.warns(BranchAmbiguityWarning):
        extract_heff(U, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        extract_heff(np.diag([np.exp(0.5j), 1.0]), 1.0)


def test_extract_heff_rejects_nonpositive_time():
    with pytest.raises(ValueError):
        extract_heff(np.eye(2), 0.0)


def test_cache_returns_same_object_and_counts():
    cache = PropagatorCache(BASIS)
    p = PulseParams(1, 1, 1.0, 3.0)
    U1 = cache.get(p, 0.5)
    U2 = cache.get(p, 0.5)
    assert U1 is U2 and cache.hits == 1 and cache.misses == 1
    cache.get(p, 0.25)
    assert cache.misses == 2 and len(cache) == 2
    assert cache.decomposition(p) is cache.decomposition(PulseParams(1, 1, 1.0, 3.0))


def test_cached_equals_direct():
    cache = PropagatorCache(BASIS)
    p = PulseParams(-1, 1, 0.8, 5.0, 0.05, 0.01)
    np.testing.assert_allclose(cache.get(p, 0.37).matrix, expm_h(build_hamiltonian(BASIS, p), 0.37), atol=1e-10)
