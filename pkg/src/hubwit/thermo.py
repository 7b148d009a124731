"""Thermal averages over sector spectra: susceptibility, local moment, witness.

The witness per site is

    witness_e = chi_z - (l0_z - 1/12) / T

with chi_z the z-channel susceptibility per site from magnetization
fluctuations and l0_z the on-site z-spin correlation (local moment).
Negative witness_e certifies entanglement.  Because total S^z is conserved,
every eigenstate carries a sharp M_z and chi_z is an exact spectral sum.

Units: k_B = 1, t = 1, mu_B = 1 throughout.  The full isotropic
susceptibility is 3 * chi_z (exposed as a convenience property).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.special

from .ed import Spectrum
from .lattice import ClusterGeometry, hopping_adjacency

WITNESS_OFFSET = 1.0 / 12.0  # separable-state floor for s_max = 1/2


class ThermoError(ValueError):
    pass


class EnsembleKind(str, Enum):
    CANONICAL = "canonical"  # half filled: n_up + n_dn = n_sites, all S^z resolutions
    GRAND_CANONICAL = "grand"


@dataclass(frozen=True)
class Ensemble:
    """Trace prescription: which sectors enter and with what fugacity weight."""

    kind: EnsembleKind
    mu: float | None = None  # grand canonical only; None means u/2 (half filling)

    @classmethod
    def canonical(cls) -> "Ensemble":
        return cls(EnsembleKind.CANONICAL)

    @classmethod
    def grand_canonical(cls, mu: float | None = None) -> "Ensemble":
        return cls(EnsembleKind.GRAND_CANONICAL, mu)

    @property
    def tag(self) -> str:
        return self.kind.value

    def chemical_potential(self, u: float) -> float:
        if self.kind is EnsembleKind.CANONICAL:
            return 0.0
        return 0.5 * u if self.mu is None else self.mu

    def sectors(self, n_sites: int) -> list[tuple[int, int]]:
        if self.kind is EnsembleKind.CANONICAL:
            return [(n_up, n_sites - n_up) for n_up in range(n_sites + 1)]
        return [(a, b) for a in range(n_sites + 1) for b in range(n_sites + 1)]


@dataclass(frozen=True)
class ThermalObservables:
    """Per-site thermal observables at one temperature."""

    temperature: float
    chi_z: float
    l0_z: float
    witness_e: float
    mean_filling: float
    mean_energy: float

    @property
    def chi_full(self) -> float:
        """Isotropic total susceptibility, 3 * chi_z."""
        return 3.0 * self.chi_z


def _assemble(temperature, n_sites, mz, mz2, moment, filling, energy) -> ThermalObservables:
    chi_z = (mz2 - mz**2) / (temperature * n_sites)
    l0_z = moment / (4.0 * n_sites)
    return ThermalObservables(
        temperature=temperature,
        chi_z=chi_z,
        l0_z=l0_z,
        witness_e=chi_z - (l0_z - WITNESS_OFFSET) / temperature,
        mean_filling=filling / n_sites,
        mean_energy=energy / n_sites,
    )


def thermal_observables(
    spectra: list[Spectrum], ens: Ensemble, temperature: float
) -> ThermalObservables:
    """Combine sector spectra into one ensemble average at temperature T.

    Boltzmann weights are computed from energies shifted by the global
    minimum of E - mu*N_e across all included sectors, so arbitrarily low
    temperatures stay underflow-safe.
    """
    if temperature <= 0:
        raise ThermoError(f"temperature must be positive, got {temperature}")
    if not spectra:
        raise ThermoError("no spectra supplied")
    n_sites = spectra[0].n_sites
    mu = ens.chemical_potential(spectra[0].params.u)
    required = set(ens.sectors(n_sites))
    supplied = {spec.sector for spec in spectra}
    if supplied != required:
        raise ThermoError(
            f"spectra cover sectors {sorted(supplied)} but the {ens.tag} ensemble "
            f"requires {sorted(required)}"
        )

    beta = 1.0 / temperature
    shift = min(float((spec.energies - mu * spec.n_electrons).min()) for spec in spectra)
    z = 0.0
    mz = mz2 = moment = filling = energy = 0.0
    for spec in spectra:
        w = np.exp(-beta * (spec.energies - mu * spec.n_electrons - shift))
        wsum = float(w.sum())
        z += wsum
        mz += spec.total_sz * wsum
        mz2 += spec.total_sz**2 * wsum
        moment += float(w @ spec.moment_sum)
        filling += spec.n_electrons * wsum
        energy += float(w @ spec.energies)
    return _assemble(temperature, n_sites, mz / z, mz2 / z, moment / z, filling / z, energy / z)


def free_fermion_reference(
    geom: ClusterGeometry, temperature: float, mu: float, t: float = 1.0
) -> ThermalObservables:
    """Exact U = 0 observables from the one-body thermal propagator.

    Same-spin pair correlations follow the Wick rule
    <n_i n_j> = <n_i><n_j> + rho_ij (delta_ij - rho_ji); opposite spins are
    uncorrelated.  Serves as an independent oracle for both ED and QMC.
    """
    if temperature <= 0:
        raise ThermoError(f"temperature must be positive, got {temperature}")
    beta = 1.0 / temperature
    h = -t * hopping_adjacency(geom)
    eps, phi = np.linalg.eigh(h)
    occ = scipy.special.expit(-beta * (eps - mu))
    rho = (phi * occ) @ phi.T  # <c†_i c_j>, one species
    diag = np.diag(rho)

    # <S_i^z S_j^z> = rho_ij (delta_ij - rho_ji) / 2 for spin-symmetric species
    szsz = -0.5 * rho * rho.T
    np.fill_diagonal(szsz, 0.5 * diag * (1.0 - diag))
    mz2 = float(szsz.sum())
    moment = float((2.0 * diag * (1.0 - diag)).sum())
    return _assemble(
        temperature,
        geom.n_sites,
        mz=0.0,
        mz2=mz2,
        moment=moment,
        filling=float(2.0 * diag.sum()),
        energy=float(2.0 * (eps * occ).sum()),
    )
