"""Bit-coded occupation bases per particle-number sector.

A many-body basis state is a pair of bit masks (up, dn); bit i set means
one electron of that spin at site i.  Within one spin species the creation
operators are site-ordered, so hopping signs follow from the number of
occupied sites strictly between source and destination.  Up and down
strings are kept separate: their relative ordering only contributes a
sector-constant global sign, which cancels in every expectation value.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import comb

MAX_SITES = 16


class HilbertError(ValueError):
    pass


def popcount_states(n_sites: int, k: int) -> tuple[int, ...]:
    """All n_sites-bit masks with exactly k bits set, strictly increasing."""
    if k == 0:
        return (0,)
    v = (1 << k) - 1
    limit = 1 << n_sites
    out = []
    while v < limit:
        out.append(v)
        # Gosper's hack: next larger integer with the same popcount
        t = (v | (v - 1)) + 1
        v = t | ((((t & -t) // (v & -v)) >> 1) - 1)
    return tuple(out)


@dataclass(frozen=True)
class SectorBasis:
    """Ordered basis of the (n_up, n_dn) sector of an n_sites cluster.

    The full-space index of a state is k = up_index * len(dn_states) + dn_index.
    """

    n_sites: int
    n_up: int
    n_dn: int
    up_states: tuple[int, ...]
    dn_states: tuple[int, ...]

    @property
    def dimension(self) -> int:
        return len(self.up_states) * len(self.dn_states)

    @cached_property
    def up_index(self) -> dict[int, int]:
        return {m: a for a, m in enumerate(self.up_states)}

    @cached_property
    def dn_index(self) -> dict[int, int]:
        return {m: b for b, m in enumerate(self.dn_states)}


def enumerate_sector(n_sites: int, n_up: int, n_dn: int) -> SectorBasis:
    """Enumerate the basis of one particle-number sector."""
    if not 1 <= n_sites <= MAX_SITES:
        raise HilbertError(f"n_sites must be in [1, {MAX_SITES}], got {n_sites}")
    for name, n in (("n_up", n_up), ("n_dn", n_dn)):
        if not 0 <= n <= n_sites:
            raise HilbertError(f"{name}={n} out of range [0, {n_sites}]")
    basis = SectorBasis(
        n_sites=n_sites,
        n_up=n_up,
        n_dn=n_dn,
        up_states=popcount_states(n_sites, n_up),
        dn_states=popcount_states(n_sites, n_dn),
    )
    assert len(basis.up_states) == comb(n_sites, n_up)
    assert len(basis.dn_states) == comb(n_sites, n_dn)
    return basis


def apply_hop(mask: int, i: int, j: int) -> tuple[int, int] | None:
    """Apply c†_i c_j to a single-species mask: move one particle j -> i.

    Returns (new_mask, sign) or None when the move annihilates the state
    (site j empty or site i occupied).  The sign is the parity of the
    number of occupied sites strictly between i and j.
    """
    if not (mask >> j) & 1 or (mask >> i) & 1:
        return None
    lo, hi = (i, j) if i < j else (j, i)
    between = mask & (((1 << hi) - 1) ^ ((1 << (lo + 1)) - 1))
    sign = -1 if between.bit_count() & 1 else 1
    return (mask ^ (1 << j)) | (1 << i), sign


def bits_matrix(states: tuple[int, ...], n_sites: int):
    """Occupation numbers of each mask as a (len(states), n_sites) float array."""
    import numpy as np

    out = np.zeros((len(states), n_sites))
    for row, mask in enumerate(states):
        for site in range(n_sites):
            if (mask >> site) & 1:
                out[row, site] = 1.0
    return out
