import numpy as np
import pytest

from hubwit.ed import HubbardParams, solve_sectors
from hubwit.lattice import build_lattice
from hubwit.thermo import (
    Ensemble,
    ThermoError,
    free_fermion_reference,
    thermal_observables,
)

GC = Ensemble.grand_canonical()


def solve(geom, params, ens):
    return solve_sectors(geom, params, ens.sectors(geom.n_sites))


def test_single_site_atomic_values():
    geom = build_lattice("chain", [1])
    ens = Ensemble.grand_canonical(0.0)
    spectra = solve(geom, HubbardParams(u=0.0), ens)
    for temperature in (0.1, 1.0, 10.0):
        obs = thermal_observables(spectra, ens, temperature)
        beta = 1.0 / temperature
        assert obs.chi_z == pytest.approx(beta / 8.0, abs=1e-12)
        assert obs.l0_z == pytest.approx(0.125, abs=1e-12)
        assert obs.witness_e == pytest.approx(beta / 12.0, abs=1e-12)
        assert obs.mean_filling == pytest.approx(1.0, abs=1e-12)


def test_witness_identity_by_construction():
    geom = build_lattice("chain", [4])
    spectra = solve(geom, HubbardParams(u=4.0), GC)
    for temperature in (0.2, 1.0, 7.3):
        obs = thermal_observables(spectra, GC, temperature)
        assert obs.witness_e == obs.chi_z - (obs.l0_z - 1.0 / 12.0) / temperature
        assert obs.chi_full == 3.0 * obs.chi_z
        assert obs.chi_z >= 0.0


@pytest.mark.parametrize("kind,dims", [("chain", [4]), ("ring", [4]), ("ring", [6]), ("square", [2, 2])])
@pytest.mark.parametrize("u", [0.0, 4.0, 8.0])
def test_grand_canonical_half_filling_exact(kind, dims, u):
    geom = build_lattice(kind, dims)
    spectra = solve(geom, HubbardParams(u=u), GC)
    for temperature in (0.1, 1.0, 10.0):
        obs = thermal_observables(spectra, GC, temperature)
        assert abs(obs.mean_filling - 1.0) < 1e-10


@pytest.mark.parametrize(
    "kind,dims",
    [("chain", [2]), ("chain", [5]), ("ring", [3]), ("ring", [6]), ("square", [2, 2])],
)
def test_free_fermion_oracle_matches_ed(kind, dims):
    # every geometry kind with at most 6 sites (the smallest cubic has 8)
    geom = build_lattice(kind, dims)
    spectra = solve(geom, HubbardParams(u=0.0), GC)
    for temperature in (0.2, 0.5, 1.0, 2.0, 5.0):
        ed = thermal_observables(spectra, GC, temperature)
        ff = free_fermion_reference(geom, temperature, mu=0.0)
        assert abs(ed.chi_z - ff.chi_z) < 1e-8
        assert abs(ed.l0_z - ff.l0_z) < 1e-8
        assert abs(ed.mean_filling - ff.mean_filling) < 1e-8
        assert abs(ed.mean_energy - ff.mean_energy) < 1e-8


def test_free_fermion_single_site_atomic():
    geom = build_lattice("chain", [1])
    for temperature in (0.1, 1.0, 10.0):
        obs = free_fermion_reference(geom, temperature, mu=0.0)
        assert obs.chi_z == pytest.approx(1.0 / (8.0 * temperature), rel=1e-12)
        assert obs.l0_z == pytest.approx(0.125, abs=1e-12)


def test_free_fermion_large_ring_finite():
    geom = build_lattice("ring", [64])
    obs = free_fermion_reference(geom, 1.0, mu=0.0)
    assert 0.0 < obs.chi_z < 1.0
    assert 0.0 < obs.l0_z < 0.25
    assert obs.mean_filling == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("kind,dims", [("chain", [2]), ("chain", [5]), ("ring", [4])])
@pytest.mark.parametrize("u", [0.0, 4.0, 8.0])
def test_high_temperature_law(kind, dims, u):
    geom = build_lattice(kind, dims)
    spectra = solve(geom, HubbardParams(u=u), GC)
    obs = thermal_observables(spectra, GC, 100.0)
    assert abs(100.0 * obs.witness_e - 1.0 / 12.0) < 1e-3
    assert abs(obs.l0_z - 0.125) < 5e-3


def test_infinite_temperature_limits():
    geom = build_lattice("ring", [4])
    spectra = solve(geom, HubbardParams(u=4.0), GC)
    obs = thermal_observables(spectra, GC, 1e4)
    assert obs.l0_z == pytest.approx(0.125, abs=1e-4)
    assert 1e4 * obs.chi_z == pytest.approx(0.125, abs=1e-3)


def test_atomic_limit_reduces_to_fixed_spin_condition():
    # nearly-zero hopping at strong coupling: every site is a pure spin-1/2,
    # so the witness must coincide with the fixed-length condition
    # chi_z < (1/4 - 1/12)/T
    geom = build_lattice("chain", [2])
    params = HubbardParams(t=1e-6, u=50.0)
    spectra = solve(geom, params, GC)
    for temperature in (0.05, 0.2):
        obs = thermal_observables(spectra, GC, temperature)
        assert abs(obs.l0_z - 0.25) < 1e-8
        fixed_spin = obs.chi_z - (0.25 - 1.0 / 12.0) / temperature
        assert obs.witness_e == pytest.approx(fixed_spin, abs=1e-8)


def test_canonical_uses_half_filled_sectors_only():
    ens = Ensemble.canonical()
    assert set(ens.sectors(3)) == {(0, 3), (1, 2), (2, 1), (3, 0)}
    geom = build_lattice("chain", [2])
    spectra = solve(geom, HubbardParams(u=4.0), ens)
    obs = thermal_observables(spectra, ens, 1.0)
    assert obs.mean_filling == pytest.approx(1.0, abs=1e-14)


def test_sector_coverage_enforced():
    geom = build_lattice("chain", [2])
    spectra = solve(geom, HubbardParams(u=4.0), Ensemble.canonical())
    with pytest.raises(ThermoError):
        thermal_observables(spectra, GC, 1.0)


def test_temperature_must_be_positive():
    geom = build_lattice("chain", [2])
    spectra = solve(geom, HubbardParams(), GC)
    with pytest.raises(ThermoError):
        thermal_observables(spectra, GC, 0.0)
    with pytest.raises(ThermoError):
        free_fermion_reference(geom, -1.0, mu=0.0)


def test_low_temperature_underflow_safe():
    geom = build_lattice("chain", [4])
    spectra = solve(geom, HubbardParams(u=8.0), GC)
    obs = thermal_observables(spectra, GC, 1e-3)
    assert np.isfinite(obs.chi_z)
    assert np.isfinite(obs.witness_e)
    assert obs.mean_filling == pytest.approx(1.0, abs=1e-9)
