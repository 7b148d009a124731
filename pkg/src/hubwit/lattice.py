"""Cluster geometries and nearest-neighbor bond lists.

Bonds are stored as directed pairs, one per (site, positive lattice
direction); the Hermitian conjugate is added by the Hamiltonian builders
and must never appear in the bond list itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class LatticeKind(str, Enum):
    CHAIN = "chain"
    RING = "ring"
    SQUARE = "square"
    CUBIC = "cubic"


_NDIMS = {
    LatticeKind.CHAIN: 1,
    LatticeKind.RING: 1,
    LatticeKind.SQUARE: 2,
    LatticeKind.CUBIC: 3,
}


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class ClusterGeometry:
    """Sites plus directed bond list of a finite cluster."""

    kind: LatticeKind
    dims: tuple[int, ...]
    n_sites: int
    bonds: tuple[tuple[int, int], ...]

    @property
    def label(self) -> str:
        return f"{self.kind.value}-{'x'.join(str(d) for d in self.dims)}"


def build_lattice(kind: LatticeKind | str, dims: list[int] | tuple[int, ...]) -> ClusterGeometry:
    """Build a chain, ring, periodic square, or periodic cubic cluster.

    Directed bonds are emitted site-major, directions ordered +x, +y, +z.
    Wraparound duplicates in a periodic dimension of length 2 are kept
    (giving amplitude-2t hopping), except for the 2-site ring, which is
    collapsed to the single dimer bond.
    """
    kind = LatticeKind(kind)
    dims = tuple(int(d) for d in dims)
    if len(dims) != _NDIMS[kind]:
        raise LatticeError(f"{kind.value} needs {_NDIMS[kind]} dimension(s), got {dims}")
    if any(d < 1 for d in dims):
        raise LatticeError(f"dimensions must be positive, got {dims}")
    if kind is LatticeKind.RING and dims[0] < 2:
        raise LatticeError("ring needs at least 2 sites")
    if kind in (LatticeKind.SQUARE, LatticeKind.CUBIC) and any(d < 2 for d in dims):
        raise LatticeError(f"{kind.value} needs every dimension >= 2, got {dims}")

    n_sites = 1
    for d in dims:
        n_sites *= d

    bonds: list[tuple[int, int]] = []
    if kind is LatticeKind.CHAIN:
        bonds = [(i, i + 1) for i in range(n_sites - 1)]
    elif kind is LatticeKind.RING:
        if n_sites == 2:
            bonds = [(0, 1)]  # dimer: the two directed neighbors coincide
        else:
            bonds = [(i, (i + 1) % n_sites) for i in range(n_sites)]
    else:
        # site index = x + dims[0]*(y + dims[1]*z), x fastest
        strides = [1] * len(dims)
        for axis in range(1, len(dims)):
            strides[axis] = strides[axis - 1] * dims[axis - 1]
        for site in range(n_sites):
            coords = [(site // strides[axis]) % dims[axis] for axis in range(len(dims))]
            for axis in range(len(dims)):
                step = 1 if coords[axis] + 1 < dims[axis] else 1 - dims[axis]
                bonds.append((site, site + step * strides[axis]))

    return ClusterGeometry(kind=kind, dims=dims, n_sites=n_sites, bonds=tuple(bonds))


def hopping_adjacency(geom: ClusterGeometry):
    """Symmetric adjacency matrix K with one unit per directed bond and its conjugate."""
    import numpy as np

    k = np.zeros((geom.n_sites, geom.n_sites))
    for i, j in geom.bonds:
        k[i, j] += 1.0
        k[j, i] += 1.0
    return k


def is_bipartite(geom: ClusterGeometry) -> bool:
    """Two-colorability of the bond graph (wraparound multiplicity irrelevant)."""
    color = [-1] * geom.n_sites
    adj: list[list[int]] = [[] for _ in range(geom.n_sites)]
    for i, j in geom.bonds:
        adj[i].append(j)
        adj[j].append(i)
    for start in range(geom.n_sites):
        if color[start] >= 0:
            continue
        color[start] = 0
        queue = [start]
        while queue:
            v = queue.pop()
            for w in adj[v]:
                if color[w] < 0:
                    color[w] = 1 - color[v]
                    queue.append(w)
                elif color[w] == color[v]:
                    return False
    return True
