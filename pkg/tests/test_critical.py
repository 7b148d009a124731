import numpy as np
import pytest
from scipy.optimize import brentq

from hubwit.critical import (
    CriticalError,
    eta,
    extrapolate_thermodynamic,
    find_tc,
    observables_function,
    tc_vs_u_sweep,
)
from hubwit.ed import HubbardParams
from hubwit.lattice import build_lattice
from hubwit.thermo import Ensemble, ThermalObservables

GC = Ensemble.grand_canonical()


def test_window_validation():
    geom = build_lattice("chain", [2])
    with pytest.raises(CriticalError):
        find_tc(geom, HubbardParams(), GC, 1.0, 0.5)
    with pytest.raises(CriticalError):
        find_tc(geom, HubbardParams(), GC, 0.0, 1.0)


def test_three_site_chain_u0_has_no_crossing():
    # the two diverging terms cancel exactly as T -> 0 here; the leftover is
    # exponentially small and positive, so no crossing may be reported
    geom = build_lattice("chain", [3])
    point = find_tc(geom, HubbardParams(u=0.0), GC, 0.01, 50.0)
    assert point.status == "none"
    assert point.tc is None


def test_four_site_chain_has_crossing():
    geom = build_lattice("chain", [4])
    point = find_tc(geom, HubbardParams(u=4.0), GC, 0.05, 10.0)
    assert point.status == "ok"
    assert 0.05 < point.tc < 10.0
    obs = observables_function(geom, HubbardParams(u=4.0), GC)
    assert abs(obs(point.tc).witness_e) < 1e-8  # bisection residual
    assert obs(point.tc - 1e-4).witness_e < 0.0
    assert obs(point.tc + 1e-4).witness_e > 0.0
    lo, hi = point.bracket
    assert lo < point.tc < hi


def test_unbracketed_distinct_from_none():
    geom = build_lattice("chain", [4])
    point = find_tc(geom, HubbardParams(u=4.0), GC, 0.05, 0.3)  # crossing is ~0.6
    assert point.status == "unbracketed"
    assert point.tc is None


def _stub_observables(curve):
    def obs(temperature):
        return ThermalObservables(
            temperature=temperature,
            chi_z=1.0,
            l0_z=1.0 / 12.0,
            witness_e=curve(temperature),
            mean_filling=1.0,
            mean_energy=0.0,
        )

    return obs


def test_largest_crossing_wins():
    # upward crossings at 0.5 and 2.0, downward at 1.0: report 2.0
    curve = lambda t: (t - 0.5) * (t - 1.0) * (t - 2.0)
    geom = build_lattice("chain", [2])
    point = find_tc(geom, HubbardParams(), GC, 0.1, 5.0, observables=_stub_observables(curve))
    assert point.status == "ok"
    assert point.tc == pytest.approx(2.0, abs=1e-6)


def test_canonical_dimer_u0_against_hand_oracle():
    # six-state oracle: the (1,1) block from the hand-built 4x4, plus the
    # fully polarized states at zero energy with moment 2 and M_z = +-1
    t = 1.0
    hand = np.array(
        [[0, 0, -t, -t], [0, 0, t, t], [-t, t, 0, 0], [-t, t, 0, 0]], dtype=float
    )
    vals, vecs = np.linalg.eigh(hand)
    moment_block = (vecs**2 * np.array([2.0, 2.0, 0.0, 0.0])[:, None]).sum(axis=0)
    energies = np.concatenate([vals, [0.0, 0.0]])
    moments = np.concatenate([moment_block, [2.0, 2.0]])
    sz = np.concatenate([np.zeros(4), [1.0, -1.0]])

    def oracle_witness(temperature):
        beta = 1.0 / temperature
        w = np.exp(-beta * (energies - energies.min()))
        z = w.sum()
        chi = beta * ((w @ sz**2) / z - ((w @ sz) / z) ** 2) / 2.0
        l0 = (w @ moments) / z / 8.0
        return chi - (l0 - 1.0 / 12.0) * beta

    expected = brentq(oracle_witness, 0.05, 5.0, xtol=1e-12)
    point = find_tc(build_lattice("chain", [2]), HubbardParams(u=0.0), Ensemble.canonical(), 0.05, 5.0)
    assert point.status == "ok"
    assert point.tc == pytest.approx(expected, abs=1e-8)


def test_sweep_single_point_reduces_to_find_tc():
    geom = build_lattice("chain", [4])
    curve = tc_vs_u_sweep(geom, GC, [4.0], (0.05, 10.0))
    single = find_tc(geom, HubbardParams(u=4.0), GC, 0.05, 10.0)
    assert len(curve.points) == 1
    assert curve.points[0].tc == pytest.approx(single.tc, abs=1e-9)
    assert curve.u_max == pytest.approx(4.0)


def test_sweep_propagates_missing_points_without_aborting():
    geom = build_lattice("ring", [4])  # no crossing at very small U
    curve = tc_vs_u_sweep(geom, GC, [0.5, 4.0], (0.02, 20.0))
    statuses = [p.status for p in curve.points]
    assert statuses[0] == "none"
    assert statuses[1] == "ok"


def test_sweep_grid_validation():
    geom = build_lattice("chain", [2])
    with pytest.raises(CriticalError):
        tc_vs_u_sweep(geom, GC, [], (0.1, 1.0))
    with pytest.raises(CriticalError):
        tc_vs_u_sweep(geom, GC, [2.0, 1.0], (0.1, 1.0))


def test_sweep_threading_deterministic():
    geom = build_lattice("chain", [4])
    grid = [1.0, 4.0, 16.0]
    serial = tc_vs_u_sweep(geom, GC, grid, (0.05, 10.0), workers=1, refine=False)
    threaded = tc_vs_u_sweep(geom, GC, grid, (0.05, 10.0), workers=3, refine=False)
    assert [p.tc for p in serial.points] == [p.tc for p in threaded.points]


def test_extrapolation_constant_and_polynomial():
    assert extrapolate_thermodynamic([(2, 0.5), (4, 0.5), (6, 0.5)]) == pytest.approx(0.5, abs=1e-12)
    points = [(n, 1.0 + 1.0 / n) for n in (2, 4, 6)]
    assert extrapolate_thermodynamic(points) == pytest.approx(1.0, abs=1e-10)
    assert extrapolate_thermodynamic(points, order=1) == pytest.approx(1.0, abs=1e-10)


def test_extrapolation_validation():
    with pytest.raises(CriticalError):
        extrapolate_thermodynamic([(2, 0.5), (4, 0.6)])
    with pytest.raises(CriticalError):
        extrapolate_thermodynamic([(2, 0.5), (2, 0.6), (4, 0.7)])
    with pytest.raises(CriticalError):
        extrapolate_thermodynamic([(2, 0.5), (4, 0.6), (6, 0.7)], order=3)


def test_eta_values():
    assert eta(10.0, 0.4) == pytest.approx(1.0, abs=1e-14)
    assert eta(64.0, 0.1) == pytest.approx(1.6, abs=1e-14)
    with pytest.raises(CriticalError):
        eta(0.0, 0.4)
