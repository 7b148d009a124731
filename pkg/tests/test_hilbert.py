from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hubwit.hilbert import (
    HilbertError,
    apply_hop,
    bits_matrix,
    enumerate_sector,
    popcount_states,
)


@pytest.mark.parametrize(
    "n_sites,n_up,n_dn,dim", [(2, 1, 1, 4), (4, 2, 2, 36), (6, 3, 3, 400)]
)
def test_sector_dimensions(n_sites, n_up, n_dn, dim):
    assert enumerate_sector(n_sites, n_up, n_dn).dimension == dim


@given(
    n_sites=st.integers(min_value=1, max_value=10),
    n_up=st.integers(min_value=0, max_value=10),
)
def test_state_lists_canonical(n_sites, n_up):
    if n_up > n_sites:
        with pytest.raises(HilbertError):
            enumerate_sector(n_sites, n_up, 0)
        return
    states = popcount_states(n_sites, n_up)
    assert len(states) == comb(n_sites, n_up)
    assert all(s.bit_count() == n_up for s in states)
    assert all(a < b for a, b in zip(states, states[1:]))  # strictly increasing


def test_full_space_index_bijection():
    basis = enumerate_sector(4, 2, 1)
    n_dn = len(basis.dn_states)
    seen = set()
    for a in range(len(basis.up_states)):
        for b in range(n_dn):
            seen.add(a * n_dn + b)
    assert seen == set(range(basis.dimension))


def test_rejects_out_of_range():
    with pytest.raises(HilbertError):
        enumerate_sector(4, 5, 0)
    with pytest.raises(HilbertError):
        enumerate_sector(4, 0, -1)
    with pytest.raises(HilbertError):
        enumerate_sector(17, 1, 1)


def test_hop_examples():
    # move 1 -> 0 with nothing in between
    assert apply_hop(0b0010, 0, 1) == (0b0001, 1)
    # move 0 -> 3 across two occupied sites
    assert apply_hop(0b0111, 3, 0) == (0b1110, 1)
    # blocked moves annihilate
    assert apply_hop(0b0001, 0, 1) is None  # source empty
    assert apply_hop(0b0011, 0, 1) is None  # target occupied


def _jw_annihilators(n_sites):
    """Dense site-ordered fermion operators; bit k of the index is site k."""
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    z = np.diag([1.0, -1.0])
    eye = np.eye(2)
    ops = []
    for p in range(n_sites):
        m = np.array([[1.0]])
        for k in range(n_sites):
            factor = a if k == p else (z if k < p else eye)
            m = np.kron(factor, m)
        ops.append(m)
    return ops


@pytest.mark.parametrize("n_sites", [2, 3, 4])
def test_hop_signs_against_dense_jordan_wigner(n_sites):
    ops = _jw_annihilators(n_sites)
    for mask in range(1 << n_sites):
        for i in range(n_sites):
            for j in range(n_sites):
                if i == j:
                    continue
                column = (ops[i].T @ ops[j])[:, mask]
                hop = apply_hop(mask, i, j)
                if hop is None:
                    assert not column.any()
                else:
                    new_mask, sign = hop
                    assert column[new_mask] == sign
                    assert np.count_nonzero(column) == 1


@given(
    mask=st.integers(min_value=0, max_value=(1 << 8) - 1),
    i=st.integers(min_value=0, max_value=7),
    j=st.integers(min_value=0, max_value=7),
)
def test_hop_reversal_sign_consistent(mask, i, j):
    if i == j:
        return
    forward = apply_hop(mask, i, j)
    if forward is None:
        return
    new_mask, sign = forward
    back = apply_hop(new_mask, j, i)
    assert back == (mask, sign)


def test_bits_matrix_matches_masks():
    basis = enumerate_sector(5, 2, 0)
    bits = bits_matrix(basis.up_states, 5)
    for row, mask in zip(bits, basis.up_states):
        assert int(sum(row)) == 2
        rebuilt = sum(1 << k for k in range(5) if row[k])
        assert rebuilt == mask
