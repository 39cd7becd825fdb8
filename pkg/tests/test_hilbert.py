import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import constrained_indices
from pxpdrive.hilbert import (
    BasisSizeError,
    BoundaryCondition,
    admissible_mask,
    all_down_state,
    enumerate_basis,
    lucas,
)


def fib_open_dim(L):
    a, b = 2, 3  # L=1, L=2
    for _ in range(L - 1):
        a, b = b, a + b
    return a


@pytest.mark.parametrize("L,expected", [(2, 3), (3, 4), (4, 7), (6, 18), (10, 123), (12, 322)])
def test_periodic_dimensions_are_lucas(L, expected):
    assert enumerate_basis(L, "pbc").dim == expected == lucas(L)


@pytest.mark.parametrize("L,expected", [(2, 3), (3, 5), (4, 8), (10, 144)])
def test_open_dimensions_are_fibonacci(L, expected):
    assert enumerate_basis(L, "obc").dim == expected == fib_open_dim(L)


@pytest.mark.parametrize("bc", ["pbc", "obc"])
@pytest.mark.parametrize("L", range(2, 13))
def test_states_match_bruteforce_filter(L, bc):
    basis = enumerate_basis(L, bc)
    np.testing.assert_array_equal(basis.states, constrained_indices(L, bc == "pbc"))


def test_l4_periodic_listing():
    assert enumerate_basis(4).as_strings() == ["0000", "0001", "0010", "0100", "0101", "1000", "1010"]


def test_wraparound_pair_excluded_only_for_periodic():
    mask = 0b1001
    assert mask not in enumerate_basis(4, "pbc").index_of
    assert mask in enumerate_basis(4, "obc").index_of


@pytest.mark.parametrize("bad", [1, 25, 0, -3, 2.5])
def test_size_limits(bad):
    with pytest.raises(BasisSizeError):
        enumerate_basis(bad)


def test_bad_boundary_condition():
    with pytest.raises(ValueError):
        enumerate_basis(4, "twisted")


def test_l24_is_allowed_and_lucas():
    assert enumerate_basis(24).dim == lucas(24) == 103682


@given(st.integers(2, 14), st.sampled_from(["pbc", "obc"]), st.data())
def test_lookup_inverts_states(L, bc, data):
    basis = enumerate_basis(L, bc)
    i = data.draw(st.integers(0, basis.dim - 1))
    assert basis.lookup([basis.states[i]])[0] == i
    assert basis.index_of[int(basis.states[i])] == i


def test_lookup_rejects_blockaded_masks():
    with pytest.raises(KeyError):
        enumerate_basis(6).lookup([0b11])


@given(st.integers(2, 14), st.sampled_from(["pbc", "obc"]))
def test_admissible_and_sorted(L, bc):
    basis = enumerate_basis(L, bc)
    assert np.all(np.diff(basis.states) > 0)
    assert admissible_mask(basis.states, L, BoundaryCondition.parse(bc)).all()


def test_states_are_read_only():
    basis = enumerate_basis(6)
    with pytest.raises(ValueError):
        basis.states[0] = 3


def test_all_down_state():
    basis = enumerate_basis(8)
    psi = all_down_state(basis)
    assert psi[basis.index_of[0]] == 1 and np.isclose(np.linalg.norm(psi), 1)


def test_neighbours():
    assert enumerate_basis(5).neighbours(0) == (1, 4)
    assert enumerate_basis(5, "obc").neighbours(0) == (1,)
    assert enumerate_basis(2).neighbours(0) == (1,)
