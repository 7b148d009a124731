"""Thermal entanglement witness for the half-filled Hubbard model.

Exact diagonalization of small clusters, determinant quantum Monte Carlo
for larger lattices, and the critical-temperature analysis built on top.
"""

from .critical import (
    ExtrapolationResult,
    TcCurve,
    TcPoint,
    eta,
    extrapolate_thermodynamic,
    extrapolation_analysis,
    find_tc,
    tc_vs_u_sweep,
    witness_function,
)
from .dqmc import (
    Estimate,
    QmcConfig,
    QmcEstimate,
    init_qmc,
    jackknife,
    measure,
    qmc_tc_bracket,
    run_qmc,
    sweep,
    trotter_extrapolate,
)
from .ed import (
    HubbardParams,
    Spectrum,
    build_sector_hamiltonian,
    diagonalize,
    load_spectra,
    save_spectra,
    solve_sector,
    solve_sectors,
)
from .hilbert import SectorBasis, apply_hop, enumerate_sector
from .lattice import ClusterGeometry, LatticeKind, build_lattice, is_bipartite
from .thermo import (
    Ensemble,
    EnsembleKind,
    ThermalObservables,
    free_fermion_reference,
    thermal_observables,
)

__version__ = "0.1.0"

__all__ = [
    "ClusterGeometry",
    "Ensemble",
    "EnsembleKind",
    "Estimate",
    "ExtrapolationResult",
    "HubbardParams",
    "LatticeKind",
    "QmcConfig",
    "QmcEstimate",
    "SectorBasis",
    "Spectrum",
    "TcCurve",
    "TcPoint",
    "ThermalObservables",
    "apply_hop",
    "build_lattice",
    "build_sector_hamiltonian",
    "diagonalize",
    "enumerate_sector",
    "eta",
    "extrapolate_thermodynamic",
    "extrapolation_analysis",
    "find_tc",
    "free_fermion_reference",
    "init_qmc",
    "is_bipartite",
    "jackknife",
    "load_spectra",
    "measure",
    "qmc_tc_bracket",
    "run_qmc",
    "save_spectra",
    "solve_sector",
    "solve_sectors",
    "sweep",
    "tc_vs_u_sweep",
    "thermal_observables",
    "trotter_extrapolate",
    "witness_function",
    "__version__",
]
