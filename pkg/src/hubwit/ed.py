"""Per-sector Hubbard Hamiltonians and their full dense eigendecomposition.

The Hamiltonian conserves both species' particle numbers, so it is
block-diagonal over (n_up, n_dn) sectors and the hopping part factorizes
into a per-species matrix acting on one bit string while the other is a
spectator.  Only occupation-diagonal per-eigenstate observables are kept;
eigenvectors are discarded after they have been contracted, which keeps
memory bounded for the largest sectors.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .hilbert import SectorBasis, apply_hop, bits_matrix, enumerate_sector
from .lattice import ClusterGeometry, LatticeKind, build_lattice

MAX_DIMENSION = 20_000
CACHE_VERSION = 1


class EdError(RuntimeError):
    pass


@dataclass(frozen=True)
class HubbardParams:
    """Hopping t, on-site repulsion u, chemical potential mu (t = k_B = 1 units)."""

    t: float = 1.0
    u: float = 0.0
    mu: float = 0.0

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError(f"t must be positive, got {self.t}")
        if self.u < 0:
            raise ValueError(f"u must be nonnegative, got {self.u}")


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of one sector plus per-eigenstate diagonal observables.

    Degenerate eigenvalues carry no ordering guarantee among their
    eigenvectors; every quantity stored here is a basis-independent trace
    over the degenerate subspace only when summed thermally, which is the
    only way it is consumed downstream.
    """

    sector: tuple[int, int]
    n_sites: int
    params: HubbardParams
    energies: np.ndarray  # (dim,), ascending
    site_density_up: np.ndarray  # (dim, n_sites)
    site_density_dn: np.ndarray  # (dim, n_sites)
    site_double_occ: np.ndarray  # (dim, n_sites)

    @property
    def dimension(self) -> int:
        return self.energies.shape[0]

    @property
    def n_electrons(self) -> int:
        return self.sector[0] + self.sector[1]

    @property
    def total_sz(self) -> float:
        return 0.5 * (self.sector[0] - self.sector[1])

    @cached_property
    def moment_sum(self) -> np.ndarray:
        """Per-eigenstate sum over sites of <n_up + n_dn - 2 n_up n_dn>."""
        return (
            self.site_density_up + self.site_density_dn - 2.0 * self.site_double_occ
        ).sum(axis=1)

    def spin_flipped(self) -> "Spectrum":
        """The (n_dn, n_up) sector, obtained from the global spin-flip symmetry."""
        return Spectrum(
            sector=(self.sector[1], self.sector[0]),
            n_sites=self.n_sites,
            params=self.params,
            energies=self.energies,
            site_density_up=self.site_density_dn,
            site_density_dn=self.site_density_up,
            site_double_occ=self.site_double_occ,
        )


def _species_hopping(states: tuple[int, ...], index, bonds, t: float) -> np.ndarray:
    """Single-species hopping matrix -t (c†_i c_j + c†_j c_i) over all bonds."""
    m = len(states)
    h = np.zeros((m, m))
    for col, mask in enumerate(states):
        for i, j in bonds:
            for dst, src in ((i, j), (j, i)):
                hop = apply_hop(mask, dst, src)
                if hop is not None:
                    h[index[hop[0]], col] += -t * hop[1]
    return h


def build_sector_hamiltonian(
    geom: ClusterGeometry, params: HubbardParams, basis: SectorBasis
) -> np.ndarray:
    """Dense real symmetric Hamiltonian of one (n_up, n_dn) sector."""
    if basis.n_sites != geom.n_sites:
        raise EdError(f"basis has {basis.n_sites} sites, geometry has {geom.n_sites}")
    if basis.dimension > MAX_DIMENSION:
        raise EdError(
            f"sector dimension {basis.dimension} exceeds the dense-ED cap {MAX_DIMENSION}"
        )
    h_up = _species_hopping(basis.up_states, basis.up_index, geom.bonds, params.t)
    h_dn = _species_hopping(basis.dn_states, basis.dn_index, geom.bonds, params.t)
    n_dn = len(basis.dn_states)
    n_up = len(basis.up_states)
    h = np.kron(h_up, np.eye(n_dn)) + np.kron(np.eye(n_up), h_dn)
    up_bits = bits_matrix(basis.up_states, basis.n_sites)
    dn_bits = bits_matrix(basis.dn_states, basis.n_sites)
    double_occ = (up_bits @ dn_bits.T).ravel()  # common occupied sites per (up, dn) pair
    h[np.diag_indices_from(h)] += params.u * double_occ
    return h


def diagonalize(
    h: np.ndarray,
    basis: SectorBasis,
    params: HubbardParams,
) -> Spectrum:
    """Full symmetric eigendecomposition with contracted diagonal observables."""
    scale = max(1.0, float(np.abs(h).max()))
    asym = float(np.abs(h - h.T).max())
    if asym > 1e-12 * scale:
        raise EdError(f"matrix is not symmetric: max|H - H^T| = {asym:.3e}")
    try:
        energies, vectors = scipy.linalg.eigh(h)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure path
        raise EdError(f"eigensolver failed on a {h.shape[0]}x{h.shape[0]} matrix: {exc}")
    weights = vectors**2  # (basis index, eigenstate)
    up_bits = bits_matrix(basis.up_states, basis.n_sites)
    dn_bits = bits_matrix(basis.dn_states, basis.n_sites)
    n_dn = len(basis.dn_states)
    occ_up = np.repeat(up_bits, n_dn, axis=0)  # (dim, n_sites) in k = a*n_dn + b order
    occ_dn = np.tile(dn_bits, (len(basis.up_states), 1))
    occ_double = occ_up * occ_dn
    return Spectrum(
        sector=(basis.n_up, basis.n_dn),
        n_sites=basis.n_sites,
        params=params,
        energies=energies,
        site_density_up=weights.T @ occ_up,
        site_density_dn=weights.T @ occ_dn,
        site_double_occ=weights.T @ occ_double,
    )


def solve_sector(geom: ClusterGeometry, params: HubbardParams, sector: tuple[int, int]) -> Spectrum:
    basis = enumerate_sector(geom.n_sites, sector[0], sector[1])
    return diagonalize(build_sector_hamiltonian(geom, params, basis), basis, params)


def solve_sectors(
    geom: ClusterGeometry,
    params: HubbardParams,
    sectors: Iterable[tuple[int, int]],
    workers: int | None = None,
) -> list[Spectrum]:
    """Solve many sectors, reusing the spin-flip symmetry (a,b) <-> (b,a).

    Sectors are independent; with workers > 1 they are diagonalized
    concurrently.  The returned list follows the requested order.
    """
    wanted = [tuple(s) for s in sectors]
    unique: list[tuple[int, int]] = []
    for a, b in wanted:
        key = (a, b) if a >= b else (b, a)
        if key not in unique:
            unique.append(key)

    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            solved = list(pool.map(lambda s: solve_sector(geom, params, s), unique))
    else:
        solved = [solve_sector(geom, params, s) for s in unique]

    by_sector = {spec.sector: spec for spec in solved}
    out = []
    for a, b in wanted:
        if (a, b) in by_sector:
            out.append(by_sector[(a, b)])
        else:
            spec = by_sector[(b, a)].spin_flipped()
            by_sector[(a, b)] = spec
            out.append(spec)
    return out


# ---------------------------------------------------------------------------
# Spectrum cache: lossless npz dump keyed by (geometry, params, sector)
# ---------------------------------------------------------------------------


def _cache_key(geom: ClusterGeometry, params: HubbardParams) -> dict:
    return {
        "version": CACHE_VERSION,
        "geometry": {"kind": geom.kind.value, "dims": list(geom.dims)},
        "params": asdict(params),
    }


def save_spectra(path, geom: ClusterGeometry, spectra: Sequence[Spectrum]) -> None:
    """Write spectra to an npz file; float64 arrays round-trip losslessly."""
    payload = {
        "header": np.frombuffer(
            json.dumps(
                {**_cache_key(geom, params=spectra[0].params), "sectors": [list(s.sector) for s in spectra]}
            ).encode(),
            dtype=np.uint8,
        )
    }
    for n, spec in enumerate(spectra):
        payload[f"energies_{n}"] = spec.energies
        payload[f"up_{n}"] = spec.site_density_up
        payload[f"dn_{n}"] = spec.site_density_dn
        payload[f"docc_{n}"] = spec.site_double_occ
    np.savez_compressed(path, **payload)


def load_spectra(path, geom: ClusterGeometry, params: HubbardParams) -> list[Spectrum]:
    """Load spectra, refusing a file written for a different system."""
    with np.load(path) as data:
        header = json.loads(bytes(data["header"]).decode())
        if header.get("version") != CACHE_VERSION:
            raise EdError(f"unsupported cache version {header.get('version')}")
        expected = _cache_key(geom, params)
        found = {k: header[k] for k in ("version", "geometry", "params")}
        if found != expected:
            raise EdError(f"cache key mismatch: file has {found}, expected {expected}")
        out = []
        for n, sector in enumerate(header["sectors"]):
            out.append(
                Spectrum(
                    sector=(int(sector[0]), int(sector[1])),
                    n_sites=geom.n_sites,
                    params=params,
                    energies=data[f"energies_{n}"],
                    site_density_up=data[f"up_{n}"],
                    site_density_dn=data[f"dn_{n}"],
                    site_double_occ=data[f"docc_{n}"],
                )
            )
    return out


def dimer_geometry() -> ClusterGeometry:
    return build_lattice(LatticeKind.CHAIN, [2])
